"""Pure-Python/NumPy reference implementations of the hot kernels.

Semantics must match the compiled backend bit for bit: all randomness is
drawn by the caller and passed in as arrays, and the kernels perform only
integer and comparison logic on it (plus float comparisons with a fixed
evaluation order), so both backends produce identical outputs.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"


def aloha_chunk(u, d, p_tx, eps_phy, active, latencies, start_slot):
    """Advance a batch slotted-ALOHA run over one chunk of slots.

    u: (n_slots, n_users) uniforms; d: (n_slots,) decode uniforms.
    A backlogged user transmits when u < p_tx; a slot delivers when exactly
    one backlogged user transmits and d >= eps_phy. `active` (uint8) and
    `latencies` (int64, 1-based slot index, 0 = pending) are updated in
    place. Returns the number of users that finished in this chunk.
    """
    n_slots = u.shape[0]
    act_idx = np.flatnonzero(active)
    s = 0
    finished = 0
    while s < n_slots and act_idx.size > 0:
        tx = u[s:, act_idx] < p_tx
        counts = tx.sum(axis=1)
        ok = d[s:] >= eps_phy
        hits = np.flatnonzero((counts == 1) & ok)
        if hits.size == 0:
            break
        h = int(hits[0])
        winner_local = int(np.argmax(tx[h]))
        winner = int(act_idx[winner_local])
        active[winner] = 0
        latencies[winner] = start_slot + s + h + 1
        finished += 1
        s += h + 1
        act_idx = np.delete(act_idx, winner_local)
    return finished


def aloha_saturated_chunk(u, d, p_tx, eps_phy):
    """Count slots where user 0 transmits alone and the decode succeeds.

    All users are permanently backlogged (saturated contention).
    """
    tx = u < p_tx
    alone = tx[:, 0] & (tx[:, 1:].sum(axis=1) == 0)
    ok = d >= eps_phy
    return int(np.count_nonzero(alone & ok))


def peel(indptr, indices, n_slots, decodable):
    """Iterative singleton peeling on the user/slot replica graph.

    indptr/indices describe each user's replica slots (CSR layout). A slot
    holding exactly one unresolved replica resolves its user if that user's
    frame transmission is decodable; the user's other replicas are then
    cancelled. Returns a uint8 mask of decoded users.
    """
    n_users = len(indptr) - 1
    ip = [int(x) for x in indptr]
    idx = [int(x) for x in indices]
    dec = [bool(x) for x in decodable]
    counts = [0] * n_slots
    sums = [0] * n_slots
    for j in range(n_users):
        for p in range(ip[j], ip[j + 1]):
            s = idx[p]
            counts[s] += 1
            sums[s] += j
    stack = [s for s in range(n_slots) if counts[s] == 1]
    decoded = np.zeros(n_users, dtype=np.uint8)
    while stack:
        s = stack.pop()
        if counts[s] != 1:
            continue
        j = sums[s]
        if decoded[j] or not dec[j]:
            continue
        decoded[j] = 1
        for p in range(ip[j], ip[j + 1]):
            t = idx[p]
            counts[t] -= 1
            sums[t] -= j
            if counts[t] == 1:
                stack.append(t)
    return decoded


def rsc_walk(snr, thr_raw, thr_up, eps, u, dwell):
    """Tier-selection state machine over an SNR trace.

    thr_raw/thr_up are per-rank thresholds (nondecreasing); a downgrade to
    the highest raw-feasible rank is immediate, an upgrade requires `dwell`
    consecutive samples clearing the hysteresis threshold. Rank -1 is
    outage. Delivery per sample is u < 1 - eps[rank, sample].
    Returns (ranks int64, delivered uint8, switch_count).
    """
    n = len(snr)
    n_tiers = len(thr_raw)
    s = snr.tolist()
    uu = u.tolist()
    raw = [float(x) for x in thr_raw]
    up = [float(x) for x in thr_up]
    eps_rows = [eps[r].tolist() for r in range(n_tiers)]
    ranks = np.empty(n, dtype=np.int64)
    delivered = np.zeros(n, dtype=np.uint8)

    cur = -1
    x0 = s[0]
    for r in range(n_tiers):
        if raw[r] <= x0:
            cur = r
        else:
            break
    switches = 0
    dwell_count = 0
    for i in range(n):
        x = s[i]
        if cur >= 0 and x < raw[cur]:
            new = -1
            for r in range(n_tiers):
                if raw[r] <= x:
                    new = r
                else:
                    break
            cur = new
            switches += 1
            dwell_count = 0
        best_up = -1
        for r in range(n_tiers):
            if up[r] <= x:
                best_up = r
            else:
                break
        if best_up > cur:
            dwell_count += 1
            if dwell_count >= dwell:
                cur = best_up
                switches += 1
                dwell_count = 0
        else:
            dwell_count = 0
        ranks[i] = cur
        if cur >= 0 and uu[i] < 1.0 - eps_rows[cur][i]:
            delivered[i] = 1
    return ranks, delivered, switches

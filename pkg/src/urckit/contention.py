"""Multi-user contention: shared-rate curves and random-access latency curves.

Two regimes:

* Long-horizon guaranteed rate: users share bandwidth under a deterministic
  split (a dedicated share up to a user cap, an even split beyond it);
  windowed average rates are reported at the percentiles matching the
  requested availabilities.

* Short-horizon latency: all K users hold one message at t=0 (batch model)
  and contend slot by slot, either with slotted ALOHA (a slot delivers when
  exactly one backlogged user transmits and the decode succeeds) or with
  frame-based coded random access, where users send replicas and the
  receiver peels singleton slots, cancelling resolved users' replicas.
  Slots are sized by the finite-blocklength core, so a smaller basic-mode
  payload directly shortens every slot.

Monte Carlo trials use per-(K, trial) substreams of a single root seed, so
results are reproducible, order-independent, and thread-count invariant.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Union

import numpy as np

from . import fbl
from ._kernels import BACKEND, aloha_chunk, aloha_saturated_chunk, peel
from .channels import RNG_NAME, ChannelModel, generate_trace
from .errors import DomainError, ReportFormatError
from .fbl import ChannelUseMode
from .report import CurvePoint, CurveReport, percentile_with_ci

_ALOHA_CHUNK_SLOTS = 512
_SATURATED_BLOCK_SLOTS = 1 << 14


@dataclass(frozen=True)
class SlottedAloha:
    p_tx: float

    def __post_init__(self):
        if not (0.0 < self.p_tx <= 1.0):
            raise DomainError(f"p_tx must lie in (0,1], got {self.p_tx!r}")


@dataclass(frozen=True)
class CodedRandomAccess:
    mean_degree: float
    frame_slots: int

    def __post_init__(self):
        if not self.mean_degree >= 1.0:
            raise DomainError(f"mean_degree must be >= 1, got {self.mean_degree!r}")
        if self.frame_slots < 1:
            raise DomainError(f"frame_slots must be >= 1, got {self.frame_slots!r}")


Protocol = Union[SlottedAloha, CodedRandomAccess]


@dataclass(frozen=True)
class UrclScenario:
    """Shared-rate scenario: window-averaged per-user rate guarantees."""

    total_bandwidth_hz: float
    gamma: Union[float, ChannelModel]
    dedicated_user_cap: int
    per_user_guarantees: tuple  # of (rate_bps, availability) pairs
    window_s: float
    n_users: int = 1
    n_windows: int = 200
    samples_per_window: int = 50
    seed: int = 0

    def __post_init__(self):
        if not self.total_bandwidth_hz > 0:
            raise DomainError(f"total_bandwidth_hz must be > 0, got {self.total_bandwidth_hz!r}")
        if self.dedicated_user_cap < 1:
            raise DomainError(f"dedicated_user_cap must be >= 1, got {self.dedicated_user_cap!r}")
        if not self.window_s > 0.01:
            raise DomainError(
                f"window_s must exceed 10 ms (long-horizon regime), got {self.window_s!r}"
            )
        if self.n_users < 1:
            raise DomainError(f"n_users must be >= 1, got {self.n_users!r}")
        if self.n_windows < 1 or self.samples_per_window < 1:
            raise DomainError("n_windows and samples_per_window must be >= 1")
        for pair in self.per_user_guarantees:
            rate, avail = pair
            if not rate >= 0 or not (0.0 < avail < 1.0):
                raise DomainError(f"guarantee {pair!r} needs rate >= 0 and availability in (0,1)")
        if isinstance(self.gamma, (int, float)) and not self.gamma >= 0:
            raise DomainError(f"gamma must be >= 0, got {self.gamma!r}")


@dataclass(frozen=True)
class UrcsScenario:
    """Short-latency scenario: batch random access, percentile latency."""

    n_users: int
    payload_bits: float
    epsilon: float
    gamma: float
    protocol: Protocol
    latency_cap_s: float
    percentile: float = 0.999
    symbol_period_s: float = 1e-6
    metadata_bits: float = 80.0
    n_trials: int = 1000
    mode: ChannelUseMode = ChannelUseMode.COMPLEX
    seed: int = 0

    def __post_init__(self):
        if self.n_users < 1:
            raise DomainError(f"n_users must be >= 1, got {self.n_users!r}")
        if not self.payload_bits > 0:
            raise DomainError(f"payload_bits must be > 0, got {self.payload_bits!r}")
        if not (0.0 < self.epsilon < 1.0):
            raise DomainError(f"epsilon must lie in (0,1), got {self.epsilon!r}")
        if not self.gamma > 0:
            raise DomainError(f"gamma must be > 0, got {self.gamma!r}")
        if not self.latency_cap_s > 0:
            raise DomainError(f"latency_cap_s must be > 0, got {self.latency_cap_s!r}")
        if not (0.0 < self.percentile < 1.0):
            raise DomainError(f"percentile must lie in (0,1), got {self.percentile!r}")
        if not self.symbol_period_s > 0:
            raise DomainError(f"symbol_period_s must be > 0, got {self.symbol_period_s!r}")
        if self.metadata_bits < 0:
            raise DomainError(f"metadata_bits must be >= 0, got {self.metadata_bits!r}")
        if self.n_trials < 1:
            raise DomainError(f"n_trials must be >= 1, got {self.n_trials!r}")


def slot_channel_uses(scenario: UrcsScenario) -> int:
    """Channel uses per slot: one codeword carrying payload plus metadata."""
    return fbl.min_blocklength(
        scenario.payload_bits + scenario.metadata_bits,
        scenario.epsilon,
        scenario.gamma,
        scenario.mode,
    )


def aloha_tagged_success_probability(n_users: int, p_tx: float, eps_phy: float) -> float:
    """Closed-form saturated per-slot success: p*(1-p)^(K-1)*(1-eps)."""
    if n_users < 1:
        raise DomainError(f"n_users must be >= 1, got {n_users!r}")
    return p_tx * (1.0 - p_tx) ** (n_users - 1) * (1.0 - eps_phy)


def simulate_saturated_aloha(
    n_users: int,
    p_tx: float,
    eps_phy: float,
    n_slots: int,
    seed: int = 0,
    threads: int = 1,
) -> int:
    """Count tagged-user successes over n_slots of saturated slotted ALOHA.

    Slots are processed in fixed blocks, each with its own seed substream,
    so the count is independent of the thread count.
    """
    if n_slots < 1:
        raise DomainError(f"n_slots must be >= 1, got {n_slots!r}")
    blocks = []
    start = 0
    b = 0
    while start < n_slots:
        size = min(_SATURATED_BLOCK_SLOTS, n_slots - start)
        blocks.append((b, size))
        start += size
        b += 1

    def run_block(args):
        idx, size = args
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(idx,)))
        u = rng.random((size, n_users))
        d = rng.random(size)
        return aloha_saturated_chunk(u, d, p_tx, eps_phy)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            counts = list(pool.map(run_block, blocks))
    else:
        counts = [run_block(x) for x in blocks]
    return int(sum(counts))


def _aloha_trial(n_users, p_tx, eps_phy, max_slots, rng):
    active = np.ones(n_users, dtype=np.uint8)
    latencies = np.zeros(n_users, dtype=np.int64)
    done = 0
    slot = 0
    while done < n_users and slot < max_slots:
        size = min(_ALOHA_CHUNK_SLOTS, max_slots - slot)
        u = rng.random((size, n_users))
        d = rng.random(size)
        done += aloha_chunk(u, d, p_tx, eps_phy, active, latencies, slot)
        slot += size
    return latencies


def _draw_degrees(rng, n, mean_degree, frame_slots):
    base = int(math.floor(mean_degree))
    frac = mean_degree - base
    if frac > 0.0:
        degrees = base + (rng.random(n) < frac).astype(np.int64)
    else:
        degrees = np.full(n, base, dtype=np.int64)
    return np.clip(degrees, 1, frame_slots)


def _cra_trial(n_users, mean_degree, frame_slots, eps_phy, max_frames, rng):
    latencies = np.zeros(n_users, dtype=np.int64)
    active = list(range(n_users))
    for frame in range(max_frames):
        na = len(active)
        if na == 0:
            break
        degrees = _draw_degrees(rng, na, mean_degree, frame_slots)
        indptr = np.zeros(na + 1, dtype=np.int64)
        np.cumsum(degrees, out=indptr[1:])
        indices = np.empty(int(indptr[-1]), dtype=np.int64)
        for i in range(na):
            indices[indptr[i] : indptr[i + 1]] = rng.permutation(frame_slots)[: degrees[i]]
        decodable = (rng.random(na) >= eps_phy).astype(np.uint8)
        decoded = peel(indptr, indices, frame_slots, decodable)
        still = []
        for i, user in enumerate(active):
            if decoded[i]:
                latencies[user] = (frame + 1) * frame_slots
            else:
                still.append(user)
        active = still
    return latencies


def _batch_latency_slots(scenario: UrcsScenario, n_users: int, max_slots: int, threads: int):
    """Latency in slots per (trial, user); 0 marks a censored (capped) user."""
    proto = scenario.protocol
    out = np.empty((scenario.n_trials, n_users), dtype=np.int64)

    def run_trial(t):
        rng = np.random.default_rng(
            np.random.SeedSequence(scenario.seed, spawn_key=(n_users, t))
        )
        if isinstance(proto, SlottedAloha):
            return _aloha_trial(n_users, proto.p_tx, scenario.epsilon, max_slots, rng)
        max_frames = max(1, max_slots // proto.frame_slots)
        return _cra_trial(
            n_users, proto.mean_degree, proto.frame_slots, scenario.epsilon, max_frames, rng
        )

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for t, lat in enumerate(pool.map(run_trial, range(scenario.n_trials))):
                out[t] = lat
    else:
        for t in range(scenario.n_trials):
            out[t] = run_trial(t)
    return out


def urcs_latency_curve(scenario: UrcsScenario, k_range, threads: int = 1) -> CurveReport:
    """Percentile delivery latency (seconds) vs. number of contending users.

    Latency counts slots until a user's first successful decode, converted
    to seconds through the finite-blocklength slot size; users still pending
    at the latency cap are censored at the cap and counted in the metadata.
    """
    ks = [int(k) for k in k_range]
    if any(k < 1 for k in ks) or any(b <= a for a, b in zip(ks, ks[1:])):
        raise DomainError(f"k_range must be strictly increasing positive ints, got {k_range!r}")
    slot_cu = slot_channel_uses(scenario)
    slot_s = slot_cu * scenario.symbol_period_s
    max_slots = max(1, int(math.floor(scenario.latency_cap_s / slot_s)))

    points = []
    censored_by_k = {}
    for k in ks:
        lat_slots = _batch_latency_slots(scenario, k, max_slots, threads)
        flat = lat_slots.reshape(-1)
        censored = int(np.count_nonzero(flat == 0))
        seconds = np.where(flat == 0, scenario.latency_cap_s, flat * slot_s)
        value, lo, hi = percentile_with_ci(seconds, scenario.percentile)
        points.append(CurvePoint(k=k, value=value, ci_low=lo, ci_high=hi))
        censored_by_k[str(k)] = censored

    meta = {
        "kind": "urcs-latency",
        "protocol": type(scenario.protocol).__name__,
        "slot_channel_uses": slot_cu,
        "slot_seconds": slot_s,
        "max_slots": max_slots,
        "percentile": scenario.percentile,
        "n_trials": scenario.n_trials,
        "censored": censored_by_k,
        "seed": scenario.seed,
        "rng": RNG_NAME,
        "backend": BACKEND,
    }
    out = CurveReport(points=points, meta=meta)
    out.validate()
    return out


def rsc_latency_comparison(
    scenario: UrcsScenario,
    payload_full_bits: float,
    payload_basic_bits: float,
    k_range,
    threads: int = 1,
):
    """Latency curves for full vs. basic payloads under shared randomness.

    Both runs consume identical random substreams, so slot-level outcomes
    coincide and the basic-mode curve (smaller payload, shorter slots) lies
    at or below the full-mode curve at every K.
    """
    if payload_basic_bits > payload_full_bits:
        raise DomainError("basic payload must not exceed the full payload")
    full = urcs_latency_curve(
        replace(scenario, payload_bits=payload_full_bits), k_range, threads
    )
    basic = urcs_latency_curve(
        replace(scenario, payload_bits=payload_basic_bits), k_range, threads
    )
    return {"full": full, "basic": basic}


def _windowed_rates(scenario: UrclScenario, share_hz: float):
    """Pooled windowed average rates (bps) across the scenario's users."""
    n_samples = scenario.n_windows * scenario.samples_per_window
    rates = []
    for user in range(scenario.n_users):
        if isinstance(scenario.gamma, ChannelModel):
            trace = generate_trace(
                scenario.gamma,
                n_samples,
                scenario.window_s / scenario.samples_per_window,
                np.random.SeedSequence(scenario.seed, spawn_key=(user,)),
            )
            snr = trace.samples
        else:
            snr = np.full(n_samples, float(scenario.gamma))
        inst = share_hz * np.log2(1.0 + snr)
        rates.append(inst.reshape(scenario.n_windows, scenario.samples_per_window).mean(axis=1))
    return np.concatenate(rates)


def _series_name(availability: float) -> str:
    return f"rate_at_{availability:g}_availability"


def urcl_rate_curve(scenario: UrclScenario, k_range) -> CurveReport:
    """Windowed per-user rate percentiles vs. number of sharing users.

    Each user's bandwidth share is W/max(K, dedicated_user_cap): constant up
    to the cap, then degrading as 1/K. The percentile for availability a is
    the (1-a)-quantile of the windowed rates, reported per availability in
    the guarantees (plus the 95% and 99% defaults).
    """
    ks = [int(k) for k in k_range]
    if any(k < 1 for k in ks) or any(b <= a for a, b in zip(ks, ks[1:])):
        raise DomainError(f"k_range must be strictly increasing positive ints, got {k_range!r}")
    avail_levels = []
    for _, a in scenario.per_user_guarantees:
        if a not in avail_levels:
            avail_levels.append(a)
    for a in (0.95, 0.99):
        if a not in avail_levels:
            avail_levels.append(a)

    points = []
    for k in ks:
        share = scenario.total_bandwidth_hz / max(k, scenario.dedicated_user_cap)
        scen_k = replace(scenario, n_users=k)
        rates = _windowed_rates(scen_k, share)
        for a in avail_levels:
            value, lo, hi = percentile_with_ci(rates, 1.0 - a)
            points.append(
                CurvePoint(k=k, value=value, ci_low=lo, ci_high=hi, series=_series_name(a))
            )

    meta = {
        "kind": "urcl-rate",
        "bandwidth_share": "W / max(K, dedicated_user_cap)",
        "dedicated_user_cap": scenario.dedicated_user_cap,
        "window_s": scenario.window_s,
        "n_windows": scenario.n_windows,
        "samples_per_window": scenario.samples_per_window,
        "availability_levels": avail_levels,
        "pooling": "windows pooled across users (iid shares)",
        "seed": scenario.seed,
        "rng": RNG_NAME,
        "channel": "constant" if not isinstance(scenario.gamma, ChannelModel) else
        scenario.gamma.kind.value,
    }
    out = CurveReport(points=points, meta=meta)
    out.validate()
    return out


def urcl_check(report: CurveReport, guarantees):
    """Evaluate (rate, availability) guarantees against a rate curve report.

    A guarantee passes when the rate percentile matching its availability is
    at or above the guaranteed rate at every K in the report.
    """
    results = []
    for rate, avail in guarantees:
        name = _series_name(avail)
        pts = report.series_points(name)
        if not pts:
            raise ReportFormatError(
                f"report lacks the percentile series for availability {avail:g}"
            )
        worst = min(p.value for p in pts)
        results.append(
            {
                "rate_bps": rate,
                "availability": avail,
                "worst_percentile_rate_bps": worst,
                "passes": bool(worst >= rate),
            }
        )
    return results

# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: slotted-ALOHA slot loops, replica peeling, tier walk.

Bit-for-bit equivalent to py_backend: the caller supplies all randomness as
arrays and the kernels perform only integer work and float comparisons in a
fixed order. tests/test_kernels.py hammers the equivalence.
"""

import numpy as np

from libc.stdint cimport int64_t, uint8_t

BACKEND_NAME = "compiled"


def aloha_chunk(const double[:, ::1] u, const double[::1] d, double p_tx, double eps_phy,
                uint8_t[::1] active, int64_t[::1] latencies, long start_slot):
    """See py_backend.aloha_chunk; updates active/latencies in place."""
    cdef Py_ssize_t n_slots = u.shape[0]
    cdef Py_ssize_t n_users = u.shape[1]
    cdef Py_ssize_t s, j
    cdef int count
    cdef Py_ssize_t winner = 0
    cdef int finished = 0
    cdef Py_ssize_t remaining = 0
    for j in range(n_users):
        if active[j]:
            remaining += 1
    for s in range(n_slots):
        if remaining == 0:
            break
        count = 0
        for j in range(n_users):
            if active[j] and u[s, j] < p_tx:
                count += 1
                if count > 1:
                    break
                winner = j
        if count == 1 and d[s] >= eps_phy:
            active[winner] = 0
            latencies[winner] = start_slot + s + 1
            finished += 1
            remaining -= 1
    return finished


def aloha_saturated_chunk(const double[:, ::1] u, const double[::1] d, double p_tx, double eps_phy):
    """See py_backend.aloha_saturated_chunk; tagged user is column 0."""
    cdef Py_ssize_t n_slots = u.shape[0]
    cdef Py_ssize_t n_users = u.shape[1]
    cdef Py_ssize_t s, j
    cdef int alone
    cdef long successes = 0
    for s in range(n_slots):
        if u[s, 0] >= p_tx:
            continue
        alone = 1
        for j in range(1, n_users):
            if u[s, j] < p_tx:
                alone = 0
                break
        if alone and d[s] >= eps_phy:
            successes += 1
    return successes


def peel(const int64_t[::1] indptr, const int64_t[::1] indices, long n_slots, const uint8_t[::1] decodable):
    """See py_backend.peel; returns a uint8 mask of decoded users."""
    cdef Py_ssize_t n_users = indptr.shape[0] - 1
    cdef int64_t[::1] counts = np.zeros(n_slots, dtype=np.int64)
    cdef int64_t[::1] sums = np.zeros(n_slots, dtype=np.int64)
    # each slot enters the stack at most once: its count passes 1 only once
    cdef int64_t[::1] stack = np.empty(n_slots, dtype=np.int64)
    cdef Py_ssize_t top = 0
    decoded_arr = np.zeros(n_users, dtype=np.uint8)
    cdef uint8_t[::1] decoded = decoded_arr
    cdef Py_ssize_t j, p
    cdef int64_t s, t

    for j in range(n_users):
        for p in range(indptr[j], indptr[j + 1]):
            s = indices[p]
            counts[s] += 1
            sums[s] += j
    for s in range(n_slots):
        if counts[s] == 1:
            stack[top] = s
            top += 1
    while top > 0:
        top -= 1
        s = stack[top]
        if counts[s] != 1:
            continue
        j = sums[s]
        if decoded[j] or not decodable[j]:
            continue
        decoded[j] = 1
        for p in range(indptr[j], indptr[j + 1]):
            t = indices[p]
            counts[t] -= 1
            sums[t] -= j
            if counts[t] == 1:
                stack[top] = t
                top += 1
    return decoded_arr


def rsc_walk(const double[::1] snr, const double[::1] thr_raw, const double[::1] thr_up,
             const double[:, ::1] eps, const double[::1] u, long dwell):
    """See py_backend.rsc_walk; returns (ranks, delivered, switch_count)."""
    cdef Py_ssize_t n = snr.shape[0]
    cdef Py_ssize_t n_tiers = thr_raw.shape[0]
    ranks_arr = np.empty(n, dtype=np.int64)
    delivered_arr = np.zeros(n, dtype=np.uint8)
    cdef int64_t[::1] ranks = ranks_arr
    cdef uint8_t[::1] delivered = delivered_arr
    cdef Py_ssize_t i, r
    cdef long cur = -1
    cdef long best_up, new
    cdef long switches = 0
    cdef long dwell_count = 0
    cdef double x

    x = snr[0]
    for r in range(n_tiers):
        if thr_raw[r] <= x:
            cur = r
        else:
            break
    for i in range(n):
        x = snr[i]
        if cur >= 0 and x < thr_raw[cur]:
            new = -1
            for r in range(n_tiers):
                if thr_raw[r] <= x:
                    new = r
                else:
                    break
            cur = new
            switches += 1
            dwell_count = 0
        best_up = -1
        for r in range(n_tiers):
            if thr_up[r] <= x:
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
        if cur >= 0 and u[i] < 1.0 - eps[cur, i]:
            delivered[i] = 1
    return ranks_arr, delivered_arr, switches

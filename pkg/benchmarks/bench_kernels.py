#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python backend.

Run from the repo root after an editable install:

    python3 benchmarks/bench_kernels.py

Each workload is executed on identical inputs in both backends; outputs are
checked for exact equality before timings are reported.
"""

import time

import numpy as np

from urckit._kernels import py_backend

try:
    from urckit._kernels import _fast
except ImportError:
    _fast = None


def timeit(fn, *args, repeat=3):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_saturated():
    rng = np.random.default_rng(1)
    u = rng.random((10**6, 10))
    d = rng.random(10**6)
    args = (u, d, 0.1, 0.05)
    return "saturated ALOHA (1e6 slots, K=10)", args, "aloha_saturated_chunk", (
        lambda a, b: a == b
    )


def bench_batch():
    rng = np.random.default_rng(2)
    u = rng.random((4096, 50))
    d = rng.random(4096)
    active = np.ones(50, dtype=np.uint8)
    lat = np.zeros(50, dtype=np.int64)

    def run(mod):
        a = active.copy()
        l = lat.copy()
        fin = mod.aloha_chunk(u, d, 0.02, 0.01, a, l, 0)
        return fin, a.tobytes(), l.tobytes()

    return "batch ALOHA chunk (4096 slots, K=50)", run


def bench_peel():
    rng = np.random.default_rng(3)
    n_users, n_slots = 20000, 30000
    degrees = rng.integers(2, 4, n_users)
    indptr = np.zeros(n_users + 1, dtype=np.int64)
    np.cumsum(degrees, out=indptr[1:])
    indices = np.empty(int(indptr[-1]), dtype=np.int64)
    for i in range(n_users):
        indices[indptr[i]: indptr[i + 1]] = rng.choice(n_slots, degrees[i], replace=False)
    decodable = np.ones(n_users, dtype=np.uint8)

    def run(mod):
        return mod.peel(indptr, indices, n_slots, decodable).tobytes()

    return "peeling decoder (20k users, 30k slots)", run


def bench_walk():
    rng = np.random.default_rng(4)
    n = 10**6
    snr = rng.uniform(0.1, 30.0, n)
    thr_raw = np.array([0.5, 4.0, 12.0])
    thr_up = thr_raw * 1.6
    eps = rng.uniform(0.0, 0.2, (3, n))
    u = rng.random(n)

    def run(mod):
        r, d, s = mod.rsc_walk(snr, thr_raw, thr_up, eps, u, 3)
        return r.tobytes(), d.tobytes(), s

    return "tier-selection walk (1e6 samples, 3 tiers)", run


def main():
    if _fast is None:
        print("compiled backend not built; showing pure-Python timings only")
    workloads = []

    name, args, attr, eq = bench_saturated()
    workloads.append((name, lambda mod, a=args, at=attr: getattr(mod, at)(*a)))
    for builder in (bench_batch, bench_peel, bench_walk):
        workloads.append(builder())

    print(f"{'workload':<42} {'python':>10} {'compiled':>10} {'speedup':>9}")
    for name, run in workloads:
        t_py, out_py = timeit(run, py_backend)
        if _fast is None:
            print(f"{name:<42} {t_py * 1e3:>8.1f}ms {'-':>10} {'-':>9}")
            continue
        t_c, out_c = timeit(run, _fast)
        if isinstance(out_py, tuple):
            match = all(
                np.array_equal(a, b) if isinstance(a, np.ndarray) else a == b
                for a, b in zip(out_py, out_c)
            )
        else:
            match = np.array_equal(out_py, out_c)
        assert match, f"backend outputs differ for {name!r}"
        print(f"{name:<42} {t_py * 1e3:>8.1f}ms {t_c * 1e3:>8.1f}ms {t_py / t_c:>8.1f}x")


if __name__ == "__main__":
    main()

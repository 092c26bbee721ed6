"""Backend parity: the compiled kernels must match the pure-Python ones exactly."""

import importlib

import numpy as np
import pytest

from urckit._kernels import py_backend

fast = pytest.importorskip(
    "urckit._kernels._fast", reason="compiled kernel extension not built"
)


def backends():
    return [py_backend, fast]


class TestAlohaChunkParity:
    @pytest.mark.parametrize("seed", range(8))
    def test_random_configs(self, seed):
        rng = np.random.default_rng(seed)
        n_slots = int(rng.integers(1, 400))
        n_users = int(rng.integers(1, 30))
        p_tx = float(rng.uniform(0.05, 1.0))
        eps = float(rng.choice([0.0, 0.1, 0.5]))
        u = rng.random((n_slots, n_users))
        d = rng.random(n_slots)
        start = int(rng.integers(0, 1000))
        init_active = (rng.random(n_users) < 0.8).astype(np.uint8)
        init_lat = rng.integers(0, 5, n_users).astype(np.int64)

        results = []
        for mod in backends():
            active = init_active.copy()
            lat = init_lat.copy()
            fin = mod.aloha_chunk(u, d, p_tx, eps, active, lat, start)
            results.append((fin, active.copy(), lat.copy()))
        assert results[0][0] == results[1][0]
        assert np.array_equal(results[0][1], results[1][1])
        assert np.array_equal(results[0][2], results[1][2])


class TestSaturatedParity:
    @pytest.mark.parametrize("seed", range(8))
    def test_random_configs(self, seed):
        rng = np.random.default_rng(100 + seed)
        n_slots = int(rng.integers(1, 5000))
        n_users = int(rng.integers(1, 20))
        p_tx = float(rng.uniform(0.01, 1.0))
        eps = float(rng.uniform(0, 0.5))
        u = rng.random((n_slots, n_users))
        d = rng.random(n_slots)
        a = py_backend.aloha_saturated_chunk(u, d, p_tx, eps)
        b = fast.aloha_saturated_chunk(u, d, p_tx, eps)
        assert a == b


class TestPeelParity:
    @pytest.mark.parametrize("seed", range(20))
    def test_random_graphs(self, seed):
        rng = np.random.default_rng(200 + seed)
        n_users = int(rng.integers(1, 40))
        n_slots = int(rng.integers(1, 20))
        degrees = rng.integers(1, min(4, n_slots) + 1, n_users)
        indptr = np.zeros(n_users + 1, dtype=np.int64)
        np.cumsum(degrees, out=indptr[1:])
        indices = np.empty(int(indptr[-1]), dtype=np.int64)
        for i in range(n_users):
            indices[indptr[i]: indptr[i + 1]] = rng.permutation(n_slots)[: degrees[i]]
        decodable = (rng.random(n_users) < 0.9).astype(np.uint8)
        a = py_backend.peel(indptr, indices, n_slots, decodable)
        b = fast.peel(indptr, indices, n_slots, decodable)
        assert np.array_equal(a, b)


class TestRscWalkParity:
    @pytest.mark.parametrize("seed", range(10))
    def test_random_walks(self, seed):
        rng = np.random.default_rng(300 + seed)
        n = int(rng.integers(2, 3000))
        n_tiers = int(rng.integers(1, 5))
        thr_raw = np.sort(rng.uniform(0.1, 20.0, n_tiers))
        thr_up = thr_raw * float(rng.uniform(1.0, 2.0))
        snr = rng.uniform(0.01, 30.0, n)
        eps = rng.uniform(0.0, 1.0, (n_tiers, n))
        u = rng.random(n)
        dwell = int(rng.integers(1, 5))
        ra, da, sa = py_backend.rsc_walk(snr, thr_raw, thr_up, eps, u, dwell)
        rb, db, sb = fast.rsc_walk(snr, thr_raw, thr_up, eps, u, dwell)
        assert np.array_equal(ra, rb)
        assert np.array_equal(da, db)
        assert sa == sb


class TestBackendSelection:
    def test_env_override_python(self):
        import subprocess
        import sys

        out = subprocess.run(
            [sys.executable, "-c", "from urckit._kernels import BACKEND; print(BACKEND)"],
            capture_output=True,
            text=True,
            env={"PATH": "/usr/bin:/bin", "URCKIT_BACKEND": "python"},
        )
        assert out.stdout.strip() == "python"

    def test_end_to_end_simulation_identical_across_backends(self):
        import subprocess
        import sys

        code = (
            "from urckit.contention import UrcsScenario, SlottedAloha, urcs_latency_curve\n"
            "s = UrcsScenario(n_users=4, payload_bits=128.0, epsilon=1e-3, gamma=1.0,\n"
            "                 protocol=SlottedAloha(p_tx=0.4), latency_cap_s=0.5,\n"
            "                 percentile=0.9, n_trials=120, seed=11)\n"
            "r = urcs_latency_curve(s, [1, 2, 4])\n"
            "print([(p.k, p.value, p.ci_low, p.ci_high) for p in r.points])\n"
        )
        outs = []
        for backend in ("python", "compiled"):
            res = subprocess.run(
                [sys.executable, "-c", code],
                capture_output=True,
                text=True,
                env={"PATH": "/usr/bin:/bin", "URCKIT_BACKEND": backend},
            )
            assert res.returncode == 0, res.stderr
            outs.append(res.stdout)
        assert outs[0] == outs[1]

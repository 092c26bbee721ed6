"""Channel trace generation: determinism, distributions, availability oracles."""

import io
import math

import numpy as np
import pytest
from scipy.stats import kstest

from urckit.channels import (
    ChannelModel,
    FadingKind,
    Interferer,
    analytic_rayleigh_availability,
    availability,
    export_trace_csv,
    generate_trace,
)
from urckit.errors import DomainError


def test_constant_model():
    model = ChannelModel(kind=FadingKind.CONSTANT, mean_snr=2.0)
    trace = generate_trace(model, 5, 1e-3, seed=1)
    assert np.array_equal(trace.samples, [2.0] * 5)


def test_rayleigh_sample_mean():
    model = ChannelModel(kind=FadingKind.RAYLEIGH, mean_snr=10.0)
    trace = generate_trace(model, 10**6, 1e-3, seed=2)
    # unit-mean exponential scaling: sample mean within 1% (std of mean ~ 1%o)
    assert np.mean(trace.samples) == pytest.approx(10.0, rel=0.01)


def test_same_seed_is_bit_identical():
    model = ChannelModel(
        kind=FadingKind.RAYLEIGH_SHADOW,
        mean_snr=5.0,
        shadow_sigma_db=6.0,
        block_length=7,
        interferer=Interferer(activity_prob=0.3, inr=2.0),
    )
    a = generate_trace(model, 5000, 1e-3, seed=99)
    b = generate_trace(model, 5000, 1e-3, seed=99)
    assert np.array_equal(a.samples, b.samples)
    c = generate_trace(model, 5000, 1e-3, seed=100)
    assert not np.array_equal(a.samples, c.samples)


def test_block_structure():
    model = ChannelModel(kind=FadingKind.RAYLEIGH, mean_snr=1.0, block_length=10)
    trace = generate_trace(model, 95, 1e-3, seed=3)
    assert len(trace.samples) == 95
    blocks = trace.samples[:90].reshape(9, 10)
    assert np.all(blocks == blocks[:, :1])
    assert len(np.unique(blocks[:, 0])) == 9


def test_rayleigh_ks_against_exponential():
    model = ChannelModel(kind=FadingKind.RAYLEIGH, mean_snr=3.0)
    trace = generate_trace(model, 10**5, 1e-3, seed=4)
    stat, _ = kstest(trace.samples / 3.0, "expon")
    # 1% critical value of the KS statistic at n=1e5: 1.63/sqrt(n)
    assert stat < 1.63 / math.sqrt(10**5)


def test_shadow_spread_matches_sigma():
    model = ChannelModel(kind=FadingKind.SHADOW, mean_snr=1.0, shadow_sigma_db=8.0)
    trace = generate_trace(model, 10**5, 1e-3, seed=5)
    db = 10.0 * np.log10(trace.samples)
    assert np.std(db) == pytest.approx(8.0, rel=0.02)
    assert np.mean(db) == pytest.approx(0.0, abs=0.1)


def test_interferer_off_leaves_trace_unchanged():
    base = ChannelModel(kind=FadingKind.RAYLEIGH, mean_snr=4.0, block_length=3)
    with_off = ChannelModel(
        kind=FadingKind.RAYLEIGH,
        mean_snr=4.0,
        block_length=3,
        interferer=Interferer(activity_prob=0.0, inr=5.0),
    )
    a = generate_trace(base, 999, 1e-3, seed=6)
    b = generate_trace(with_off, 999, 1e-3, seed=6)
    assert np.array_equal(a.samples, b.samples)


def test_interferer_always_on_scales_snr():
    base = ChannelModel(kind=FadingKind.CONSTANT, mean_snr=6.0)
    jammed = ChannelModel(
        kind=FadingKind.CONSTANT, mean_snr=6.0, interferer=Interferer(activity_prob=1.0, inr=2.0)
    )
    b = generate_trace(jammed, 100, 1e-3, seed=7)
    assert np.allclose(b.samples, 6.0 / 3.0)
    a = generate_trace(base, 100, 1e-3, seed=7)
    assert np.allclose(a.samples, 6.0)


def test_availability_constant_trace():
    model = ChannelModel(kind=FadingKind.CONSTANT, mean_snr=2.0)
    trace = generate_trace(model, 50, 1e-3, seed=8)
    assert availability(trace, 1.0) == 1.0
    assert availability(trace, 3.0) == 0.0


def test_availability_monotone_in_threshold():
    model = ChannelModel(kind=FadingKind.RAYLEIGH, mean_snr=2.0)
    trace = generate_trace(model, 10**4, 1e-3, seed=9)
    vals = [availability(trace, t) for t in np.linspace(0, 10, 30)]
    assert all(a >= b for a, b in zip(vals, vals[1:]))


def test_rayleigh_availability_matches_closed_form():
    model = ChannelModel(kind=FadingKind.RAYLEIGH, mean_snr=10.0)
    trace = generate_trace(model, 10**6, 1e-3, seed=10)
    assert availability(trace, 1.0) == pytest.approx(math.exp(-0.1), abs=0.005)


def test_analytic_rayleigh_points():
    assert analytic_rayleigh_availability(10.0, 0.0) == 1.0
    assert analytic_rayleigh_availability(10.0, 1.0) == pytest.approx(math.exp(-0.1), rel=1e-12)
    assert analytic_rayleigh_availability(1.0, 1.0) == pytest.approx(math.exp(-1.0), rel=1e-12)
    with pytest.raises(DomainError):
        analytic_rayleigh_availability(0.0, 1.0)


def test_trace_is_immutable():
    model = ChannelModel(kind=FadingKind.CONSTANT, mean_snr=2.0)
    trace = generate_trace(model, 10, 1e-3, seed=11)
    with pytest.raises((ValueError, RuntimeError)):
        trace.samples[0] = 0.0


def test_csv_export_shape_and_values():
    model = ChannelModel(kind=FadingKind.CONSTANT, mean_snr=2.5)
    trace = generate_trace(model, 3, 0.5, seed=12)
    buf = io.StringIO()
    export_trace_csv(trace, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "index,time_s,sinr_linear"
    assert lines[1] == "0,0,2.5"
    assert lines[2] == "1,0.5,2.5"
    assert len(lines) == 4


def test_model_validation():
    with pytest.raises(DomainError):
        ChannelModel(kind=FadingKind.CONSTANT, mean_snr=0.0)
    with pytest.raises(DomainError):
        ChannelModel(kind=FadingKind.CONSTANT, mean_snr=1.0, block_length=0)
    with pytest.raises(DomainError):
        Interferer(activity_prob=1.5, inr=1.0)
    model = ChannelModel(kind=FadingKind.CONSTANT, mean_snr=1.0)
    with pytest.raises(DomainError):
        generate_trace(model, 0, 1e-3, seed=0)

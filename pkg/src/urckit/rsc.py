"""Reliable service composition: tiered service with graceful degradation.

A service is an ordered list of tiers (rank 0 = basic, higher ranks carry
more payload under tighter latency). Each tier maps to a minimum-SNR
threshold through the finite-blocklength core at the system bandwidth. At
runtime the selector downgrades immediately when the current tier's raw
threshold is lost, and upgrades only after `dwell_samples` consecutive
samples clear the candidate's threshold plus a hysteresis margin: a
reliability-first asymmetry that never overstays an infeasible tier while
suppressing up-switch flapping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import fbl
from ._kernels import BACKEND, rsc_walk
from .channels import RNG_NAME, SnrTrace
from .errors import DomainError, InfeasibleTierError
from .fbl import ChannelUseMode


@dataclass(frozen=True)
class ServiceTier:
    name: str
    payload_bits: float
    latency_s: float
    reliability_target: float
    availability_target: float
    rank: int

    def __post_init__(self):
        if not self.payload_bits > 0:
            raise DomainError(f"payload_bits must be > 0, got {self.payload_bits!r}")
        if not self.latency_s > 0:
            raise DomainError(f"latency_s must be > 0, got {self.latency_s!r}")
        for nm, v in (
            ("reliability_target", self.reliability_target),
            ("availability_target", self.availability_target),
        ):
            if not (0.0 < v < 1.0):
                raise DomainError(f"{nm} must lie in (0,1), got {v!r}")
        if self.rank < 0:
            raise DomainError(f"rank must be >= 0, got {self.rank!r}")


@dataclass(frozen=True)
class RscPolicy:
    tiers: tuple
    hysteresis_db: float = 0.0
    dwell_samples: int = 1

    def __post_init__(self):
        if len(self.tiers) < 1:
            raise DomainError("policy needs at least one tier")
        if self.hysteresis_db < 0:
            raise DomainError(f"hysteresis_db must be >= 0, got {self.hysteresis_db!r}")
        if self.dwell_samples < 1:
            raise DomainError(f"dwell_samples must be >= 1, got {self.dwell_samples!r}")
        ordered = tuple(sorted(self.tiers, key=lambda t: t.rank))
        ranks = [t.rank for t in ordered]
        if len(set(ranks)) != len(ranks):
            raise DomainError(f"tier ranks must be distinct, got {ranks}")
        for lo, hi in zip(ordered, ordered[1:]):
            if hi.payload_bits < lo.payload_bits:
                raise DomainError(
                    f"tier {hi.name!r} (rank {hi.rank}) carries less payload than rank {lo.rank}"
                )
            if hi.latency_s > lo.latency_s:
                raise DomainError(
                    f"tier {hi.name!r} (rank {hi.rank}) has looser latency than rank {lo.rank}"
                )
        object.__setattr__(self, "tiers", ordered)

    @property
    def hysteresis_factor(self) -> float:
        return 10.0 ** (self.hysteresis_db / 10.0)


@dataclass(frozen=True)
class TierStats:
    name: str
    rank: int
    threshold_snr: Optional[float]
    channel_uses: Optional[int]
    time_fraction_selected: float
    availability: float
    achieved_delivery_reliability: Optional[float]
    selected_samples: int
    delivered_samples: int
    infeasible: bool
    worst_window_availability: Optional[float] = None


@dataclass
class RscReport:
    tiers: list
    outage_fraction: float
    switch_count: int
    n_samples: int
    trace_seed: object
    eval_seed: int
    rng_algorithm: str = RNG_NAME
    backend: str = BACKEND
    #: per-sample series for CSV emission: (ranks int64, delivered uint8)
    series: Optional[tuple] = field(default=None, repr=False)


def tier_channel_uses(tier: ServiceTier, system_bandwidth_hz: float) -> int:
    """Channel uses available to the tier: floor(2 * W_sys * latency)."""
    if not system_bandwidth_hz > 0:
        raise DomainError(f"system_bandwidth_hz must be > 0, got {system_bandwidth_hz!r}")
    n = int(math.floor(2.0 * system_bandwidth_hz * tier.latency_s))
    if n < 1:
        raise InfeasibleTierError(
            f"tier {tier.name!r}: no whole channel use fits in {tier.latency_s}s "
            f"at {system_bandwidth_hz} Hz"
        )
    return n


def tier_threshold(
    tier: ServiceTier,
    system_bandwidth_hz: float,
    mode: ChannelUseMode = ChannelUseMode.COMPLEX,
) -> float:
    """Minimum SNR at which the tier meets its reliability target."""
    n = tier_channel_uses(tier, system_bandwidth_hz)
    return fbl.min_snr(n, tier.payload_bits, 1.0 - tier.reliability_target, mode)


def policy_thresholds(
    policy: RscPolicy,
    system_bandwidth_hz: float,
    mode: ChannelUseMode = ChannelUseMode.COMPLEX,
):
    """Raw thresholds per rank; infeasible tiers get +inf (never selected).

    Returns (thresholds ndarray, channel_uses list, infeasible mask list).
    """
    thr = []
    n_cu = []
    infeasible = []
    for tier in policy.tiers:
        try:
            n = tier_channel_uses(tier, system_bandwidth_hz)
            thr.append(fbl.min_snr(n, tier.payload_bits, 1.0 - tier.reliability_target, mode))
            n_cu.append(n)
            infeasible.append(False)
        except (InfeasibleTierError, fbl.NoSolutionError):
            thr.append(math.inf)
            n_cu.append(None)
            infeasible.append(True)
    arr = np.asarray(thr, dtype=float)
    finite = arr[np.isfinite(arr)]
    if np.any(np.diff(finite) < 0):
        raise DomainError("tier thresholds must be nondecreasing in rank")
    return arr, n_cu, infeasible


class TierSelector:
    """Stateful tier selection: one step per SNR sample.

    Mirrors the evaluate() kernel exactly; useful for driving the state
    machine sample by sample.
    """

    def __init__(self, policy: RscPolicy, thresholds):
        self._raw = np.asarray(thresholds, dtype=float)
        self._up = self._raw * policy.hysteresis_factor
        self._dwell = policy.dwell_samples
        self.rank = None  # warm-starts on the first sample
        self._dwell_count = 0
        self.switch_count = 0

    def _argmax(self, thresholds, snr):
        best = -1
        for r, t in enumerate(thresholds):
            if t <= snr:
                best = r
            else:
                break
        return best

    def step(self, snr: float) -> int:
        """Advance one sample; returns the selected rank (-1 = outage)."""
        if self.rank is None:
            self.rank = self._argmax(self._raw, snr)
        if self.rank >= 0 and snr < self._raw[self.rank]:
            self.rank = self._argmax(self._raw, snr)
            self.switch_count += 1
            self._dwell_count = 0
        best_up = self._argmax(self._up, snr)
        if best_up > self.rank:
            self._dwell_count += 1
            if self._dwell_count >= self._dwell:
                self.rank = best_up
                self.switch_count += 1
                self._dwell_count = 0
        else:
            self._dwell_count = 0
        return self.rank


def evaluate(
    policy: RscPolicy,
    trace: SnrTrace,
    system_bandwidth_hz: float,
    mode: ChannelUseMode = ChannelUseMode.COMPLEX,
    eval_seed: int = 0,
    availability_window: Optional[int] = None,
    keep_series: bool = True,
) -> RscReport:
    """Walk the trace through tier selection and per-sample delivery draws.

    Delivery at each sample is Bernoulli with success probability
    1 - achieved_error(tier channel uses, tier payload, instantaneous SNR):
    availability reflects the threshold, delivery reliability reflects the
    actual channel. Deterministic given (policy, trace, eval_seed).
    """
    snr = np.ascontiguousarray(trace.samples, dtype=float)
    n = snr.shape[0]
    thr_raw, n_cu, infeasible = policy_thresholds(policy, system_bandwidth_hz, mode)
    thr_up = thr_raw * policy.hysteresis_factor

    n_tiers = len(policy.tiers)
    eps = np.ones((n_tiers, n), dtype=float)
    for r, tier in enumerate(policy.tiers):
        if not infeasible[r]:
            eps[r] = fbl.achieved_error_array(n_cu[r], tier.payload_bits, snr, mode)

    uniforms = np.random.default_rng(eval_seed).random(n)
    ranks, delivered, switches = rsc_walk(snr, thr_raw, thr_up, eps, uniforms, policy.dwell_samples)

    tier_stats = []
    for r, tier in enumerate(policy.tiers):
        sel = ranks == r
        n_sel = int(np.count_nonzero(sel))
        n_del = int(np.count_nonzero(delivered[sel]))
        avail_mask = snr >= thr_raw[r]
        worst = None
        if availability_window is not None and availability_window >= 1:
            n_win = n // availability_window
            if n_win > 0:
                windows = avail_mask[: n_win * availability_window].reshape(n_win, -1)
                worst = float(windows.mean(axis=1).min())
        tier_stats.append(
            TierStats(
                name=tier.name,
                rank=tier.rank,
                threshold_snr=None if infeasible[r] else float(thr_raw[r]),
                channel_uses=n_cu[r],
                time_fraction_selected=n_sel / n,
                availability=float(np.count_nonzero(avail_mask)) / n,
                achieved_delivery_reliability=(n_del / n_sel) if n_sel else None,
                selected_samples=n_sel,
                delivered_samples=n_del,
                infeasible=infeasible[r],
                worst_window_availability=worst,
            )
        )
    return RscReport(
        tiers=tier_stats,
        outage_fraction=float(np.count_nonzero(ranks == -1)) / n,
        switch_count=int(switches),
        n_samples=n,
        trace_seed=trace.seed,
        eval_seed=eval_seed,
        series=(ranks, delivered) if keep_series else None,
    )


def check_requirements(report: RscReport, policy: RscPolicy):
    """Per-tier pass/fail against availability and reliability targets.

    A tier passes when availability >= its availability target and the
    delivery reliability measured over its selected samples meets the
    reliability target; a never-selected tier fails with a flag.
    """
    results = []
    by_rank = {t.rank: t for t in policy.tiers}
    for stats in report.tiers:
        tier = by_rank[stats.rank]
        never = stats.selected_samples == 0
        avail_ok = stats.availability >= tier.availability_target
        rel_ok = (
            stats.achieved_delivery_reliability is not None
            and stats.achieved_delivery_reliability >= tier.reliability_target
        )
        results.append(
            {
                "name": stats.name,
                "rank": stats.rank,
                "passes": bool(avail_ok and rel_ok and not never),
                "availability_ok": bool(avail_ok),
                "reliability_ok": bool(rel_ok),
                "never_selected": bool(never),
            }
        )
    return results

"""Latency budgeting: reliability target -> channel uses -> bandwidth/antennas.

A payload with a reliability target needs N channel uses (from the
finite-blocklength core). A time-frequency window of T seconds and W Hz
offers 2*W*T real signal dimensions, so the bandwidth requirement is
W = N/(2T). When the available bandwidth is capped below that, the missing
dimensions come from L parallel spatial streams, each treated as an
identical Gaussian channel at the same SNR.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from . import fbl
from .errors import DomainError, NoSolutionError
from .fbl import ChannelUseMode


@dataclass(frozen=True)
class BudgetRequest:
    payload_bits: float
    epsilon: float
    gamma: float
    latency_s: float
    max_bandwidth_hz: Optional[float] = None
    mode: ChannelUseMode = ChannelUseMode.COMPLEX

    def __post_init__(self):
        if not self.payload_bits > 0:
            raise DomainError(f"payload_bits must be > 0, got {self.payload_bits!r}")
        if not (0.0 < self.epsilon < 1.0):
            raise DomainError(f"epsilon must lie in (0,1), got {self.epsilon!r}")
        if not self.latency_s > 0:
            raise DomainError(f"latency_s must be > 0, got {self.latency_s!r}")
        if self.max_bandwidth_hz is not None and not self.max_bandwidth_hz > 0:
            raise DomainError(f"max_bandwidth_hz must be > 0, got {self.max_bandwidth_hz!r}")


@dataclass(frozen=True)
class BudgetPlan:
    required_cu: int
    required_bandwidth_hz: float
    spatial_streams: int
    feasible: bool


def degrees_of_freedom(bandwidth_hz: float, latency_s: float) -> float:
    """Real signal dimensions in a T-second, W-Hz window: 2*W*T."""
    if not bandwidth_hz > 0:
        raise DomainError(f"bandwidth must be > 0, got {bandwidth_hz!r}")
    if not latency_s > 0:
        raise DomainError(f"latency must be > 0, got {latency_s!r}")
    return 2.0 * bandwidth_hz * latency_s


def required_bandwidth(n_cu: int, latency_s: float) -> float:
    """Bandwidth providing n_cu channel uses within latency_s: W = N/(2T).

    The correctly rounded quotient is nudged up by at most one ulp when
    needed so that 2*W*T >= N holds in floating point: a returned bandwidth
    must never under-provision the requested dimensions.
    """
    if n_cu < 1:
        raise DomainError(f"n_cu must be >= 1, got {n_cu!r}")
    if not latency_s > 0:
        raise DomainError(f"latency must be > 0, got {latency_s!r}")
    w = n_cu / (2.0 * latency_s)
    if 2.0 * w * latency_s < n_cu:
        w = math.nextafter(w, math.inf)
    return w


def plan(request: BudgetRequest) -> BudgetPlan:
    """Resource plan meeting the request: channel uses, bandwidth, streams.

    The stream count L is the smallest integer whose provisioned dimensions
    degrees_of_freedom(min(W, W_max), T) * L cover the required channel
    uses; L = 1 whenever the bandwidth requirement fits under the cap.
    """
    if request.gamma <= 0.0:
        raise NoSolutionError("capacity is zero at gamma = 0; no plan exists")
    n = fbl.min_blocklength(request.payload_bits, request.epsilon, request.gamma, request.mode)
    w = required_bandwidth(n, request.latency_s)
    w_max = request.max_bandwidth_hz
    if w_max is None or w <= w_max:
        return BudgetPlan(
            required_cu=n, required_bandwidth_hz=w, spatial_streams=1, feasible=True
        )

    per_stream = degrees_of_freedom(w_max, request.latency_s)
    streams = max(1, math.ceil(n / per_stream))
    while per_stream * streams < n:
        streams += 1
    while streams > 1 and per_stream * (streams - 1) >= n:
        streams -= 1
    return BudgetPlan(
        required_cu=n, required_bandwidth_hz=w, spatial_streams=streams, feasible=True
    )

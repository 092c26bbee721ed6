"""Anatomy of a digital connection: goodput, and header/data encoding choices.

A frame carries H header bits over m channel uses followed by D data bits
over n channel uses. Receiving the header is a precondition for the data, so
the delivered (goodput) rate is discounted by both error events. The
alternative is to encode header and data as one codeword over m+n channel
uses with a single error event; this module quantifies when that joint
encoding wins and what it costs an unintended receiver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import fbl
from .errors import DomainError
from .fbl import ChannelUseMode

# Error probabilities come from the finite-blocklength normal approximation
# rather than any concrete code; comparisons are at information-theoretic
# limits.


@dataclass(frozen=True)
class FrameConfig:
    """Frame layout: header (H bits over m cu) then data (D bits over n cu)."""

    header_bits: float
    data_bits: float
    header_cu: int
    data_cu: int
    symbol_period_s: float

    def __post_init__(self):
        if self.header_bits < 0:
            raise DomainError(f"header_bits must be >= 0, got {self.header_bits!r}")
        if not self.data_bits > 0:
            raise DomainError(f"data_bits must be > 0, got {self.data_bits!r}")
        if self.header_cu < 0:
            raise DomainError(f"header_cu must be >= 0, got {self.header_cu!r}")
        if self.data_cu < 1:
            raise DomainError(f"data_cu must be >= 1, got {self.data_cu!r}")
        if not self.symbol_period_s > 0:
            raise DomainError(f"symbol_period_s must be > 0, got {self.symbol_period_s!r}")
        if (self.header_cu == 0) != (self.header_bits == 0):
            raise DomainError("header_cu must be 0 exactly when header_bits is 0")

    @property
    def header_rate(self) -> float:
        """Header code rate in bits per channel use (H/m); 0 for headerless frames."""
        return self.header_bits / self.header_cu if self.header_cu > 0 else 0.0

    @property
    def total_cu(self) -> int:
        return self.header_cu + self.data_cu


@dataclass(frozen=True)
class LinkOutcome:
    """Error events, delivery probability, and goodput for one encoding."""

    p_header_err: Optional[float]
    p_data_err: Optional[float]
    p_joint_err: Optional[float]
    goodput_bps: float
    success_prob: float


@dataclass(frozen=True)
class EncodingComparison:
    separate: LinkOutcome
    joint: LinkOutcome
    joint_wins: bool
    #: Channel uses an unintended receiver must decode before it can discard
    #: the frame, relative to decoding just the header: (m+n)/m.
    receiver_energy_penalty: float
    header_cu: int


def shannon_rate(bandwidth_hz: float, gamma: float) -> float:
    """Capacity of the bandlimited AWGN channel: W*log2(1+gamma) bits/s."""
    if not bandwidth_hz > 0:
        raise DomainError(f"bandwidth must be positive, got {bandwidth_hz!r}")
    if not (gamma >= 0 and math.isfinite(gamma)):
        raise DomainError(f"gamma must be finite and >= 0, got {gamma!r}")
    return bandwidth_hz * math.log2(1.0 + gamma)


def data_volume(n: int, symbol_period_s: float, bandwidth_hz: float, gamma: float) -> float:
    """Bits deliverable in n channel uses at the Shannon rate: n*Ts*W*log2(1+gamma)."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n!r}")
    if not symbol_period_s > 0:
        raise DomainError(f"symbol_period_s must be > 0, got {symbol_period_s!r}")
    return n * symbol_period_s * shannon_rate(bandwidth_hz, gamma)


def _check_prob(name: str, p: float) -> None:
    if not (0.0 <= p <= 1.0):
        raise DomainError(f"{name} must lie in [0,1], got {p!r}")


def goodput_separate(frame: FrameConfig, p_eh: float, p_ed: float) -> LinkOutcome:
    """Delivered payload rate when header and data fail independently.

    goodput = D / ((m+n)*Ts) * (1-p_eh) * (1-p_ed); only the D data bits
    count as useful payload.
    """
    _check_prob("p_eh", p_eh)
    _check_prob("p_ed", p_ed)
    success = (1.0 - p_eh) * (1.0 - p_ed)
    raw = frame.data_bits / (frame.total_cu * frame.symbol_period_s)
    return LinkOutcome(
        p_header_err=p_eh,
        p_data_err=p_ed,
        p_joint_err=None,
        goodput_bps=raw * success,
        success_prob=success,
    )


def frame_error_probs(
    frame: FrameConfig, gamma: float, mode: ChannelUseMode = ChannelUseMode.COMPLEX
) -> tuple:
    """Header and data error probabilities at the finite-blocklength limit."""
    if frame.header_cu < 1:
        raise DomainError("frame has no header channel uses; separate decoding needs m >= 1")
    p_eh = fbl.achieved_error(frame.header_cu, frame.header_bits, gamma, mode)
    p_ed = fbl.achieved_error(frame.data_cu, frame.data_bits, gamma, mode)
    return p_eh, p_ed


def goodput_joint(
    frame: FrameConfig, gamma: float, mode: ChannelUseMode = ChannelUseMode.COMPLEX
) -> LinkOutcome:
    """Single-codeword encoding of H+D bits over m+n channel uses.

    The goodput numerator stays D: metadata is overhead in both encodings.
    """
    q_ed = fbl.achieved_error(frame.total_cu, frame.header_bits + frame.data_bits, gamma, mode)
    raw = frame.data_bits / (frame.total_cu * frame.symbol_period_s)
    return LinkOutcome(
        p_header_err=None,
        p_data_err=None,
        p_joint_err=q_ed,
        goodput_bps=raw * (1.0 - q_ed),
        success_prob=1.0 - q_ed,
    )


def adapt_header_rate(
    gamma_est: float,
    header_bits: float,
    target_p_eh: float,
    mode: ChannelUseMode = ChannelUseMode.COMPLEX,
) -> int:
    """Channel uses to spend on the header so its error stays below target.

    Lower estimated SNR yields a larger m (a lower header rate): the header
    transmission adapts to current conditions instead of a fixed worst case.
    """
    if not gamma_est > 0:
        raise DomainError(f"gamma_est must be positive, got {gamma_est!r}")
    if not (0.0 < target_p_eh < 1.0):
        raise DomainError(f"target_p_eh must lie in (0,1), got {target_p_eh!r}")
    return fbl.min_blocklength(header_bits, target_p_eh, gamma_est, mode)


def best_separate_split(
    header_bits: float,
    data_bits: float,
    total_cu: int,
    gamma: float,
    mode: ChannelUseMode = ChannelUseMode.COMPLEX,
):
    """Header/data channel-use split maximizing separate-mode success probability.

    Scans all m in [1, total_cu-1]; returns (m, success_prob).
    """
    if total_cu < 2:
        raise DomainError(f"total_cu must be >= 2, got {total_cu!r}")
    m = np.arange(1, total_cu)
    p_eh = fbl.achieved_error_array(m, header_bits, gamma, mode)
    p_ed = fbl.achieved_error_array(total_cu - m, data_bits, gamma, mode)
    success = (1.0 - p_eh) * (1.0 - p_ed)
    best = int(np.argmax(success))
    return int(m[best]), float(success[best])


def compare_encodings(
    header_bits: float,
    data_bits: float,
    total_cu: int,
    symbol_period_s: float,
    gamma: float,
    mode: ChannelUseMode = ChannelUseMode.COMPLEX,
    header_cu_split: Optional[int] = None,
) -> EncodingComparison:
    """Separate vs. joint encoding at identical total channel uses.

    When header_cu_split is not given, m comes from adapt_header_rate with a
    header error target one tenth of the data error at the remaining channel
    uses (headers are provisioned well below the data error rate); the
    split is refined by fixed-point iteration.
    """
    if total_cu < 2:
        raise DomainError(f"total_cu must be >= 2, got {total_cu!r}")
    if header_cu_split is None:
        m = max(1, int(math.ceil(header_bits / max(fbl.capacity_per_cu(gamma, mode), 1e-9))))
        m = min(m, total_cu - 1)
        for _ in range(8):
            eps_d = fbl.achieved_error(total_cu - m, data_bits, gamma, mode)
            target = min(max(eps_d / 10.0, 1e-300), 0.5)
            m_new = min(adapt_header_rate(gamma, header_bits, target, mode), total_cu - 1)
            if m_new == m:
                break
            m = m_new
    else:
        m = header_cu_split
    if not (1 <= m < total_cu):
        raise DomainError(f"header split m={m} infeasible for total_cu={total_cu}")

    frame = FrameConfig(
        header_bits=header_bits,
        data_bits=data_bits,
        header_cu=m,
        data_cu=total_cu - m,
        symbol_period_s=symbol_period_s,
    )
    p_eh, p_ed = frame_error_probs(frame, gamma, mode)
    separate = goodput_separate(frame, p_eh, p_ed)
    joint = goodput_joint(frame, gamma, mode)
    return EncodingComparison(
        separate=separate,
        joint=joint,
        joint_wins=joint.success_prob > separate.success_prob,
        receiver_energy_penalty=total_cu / m,
        header_cu=m,
    )


def sweep_joint_advantage(
    header_bits: float,
    data_bits: float,
    gammas,
    total_cus,
    mode: ChannelUseMode = ChannelUseMode.COMPLEX,
):
    """Grid sweep: joint encoding vs. the best separate split at each point.

    Returns a list of dict records (gamma, total_cu, joint/separate success,
    best separate m, joint_wins); the True entries enumerate the winning
    region.
    """
    records = []
    for g in gammas:
        for total in total_cus:
            total = int(total)
            q_ed = fbl.achieved_error(total, header_bits + data_bits, g, mode)
            m_best, sep_best = best_separate_split(header_bits, data_bits, total, g, mode)
            records.append(
                {
                    "gamma": float(g),
                    "total_cu": total,
                    "joint_success": 1.0 - q_ed,
                    "separate_success": sep_best,
                    "best_header_cu": m_best,
                    "joint_wins": bool(1.0 - q_ed > sep_best),
                }
            )
    return records

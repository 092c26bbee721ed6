"""Result containers and deterministic emission (JSON / CSV).

Output bytes are a pure function of the payload: JSON is emitted with sorted
keys, CSV with LF newlines and values at 12 significant digits. Wall-clock
timing lives in a single well-known key so determinism checks can exclude it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import ndtri

from .errors import ReportFormatError

#: SimReport key holding the only non-deterministic field.
WALL_CLOCK_KEY = "wall_clock_s"


def fmt12(x) -> str:
    """Fixed 12-significant-digit rendering used in all CSV output."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.12g}"


@dataclass(frozen=True)
class CurvePoint:
    k: int
    value: float
    ci_low: float
    ci_high: float
    series: Optional[str] = None


@dataclass
class CurveReport:
    """Points of one or more named curves over a user-count sweep."""

    points: list
    meta: dict = field(default_factory=dict)

    def series_names(self):
        names = []
        for p in self.points:
            if p.series not in names:
                names.append(p.series)
        return names

    def series_points(self, name):
        return [p for p in self.points if p.series == name]

    def validate(self):
        for name in self.series_names():
            ks = [p.k for p in self.series_points(name)]
            if any(a >= b for a, b in zip(ks, ks[1:])):
                raise ReportFormatError(f"k values not strictly increasing in series {name!r}")


def percentile_with_ci(samples, q: float, confidence: float = 0.95):
    """Order-statistic estimate of the q-quantile with a distribution-free CI.

    Returns (value, ci_low, ci_high). The CI ranks are the normal
    approximation to the binomial rank distribution, clamped to the sample.
    """
    arr = np.sort(np.asarray(samples, dtype=float))
    n = arr.size
    if n == 0:
        raise ReportFormatError("cannot take a percentile of an empty sample")
    if not (0.0 < q < 1.0):
        raise ReportFormatError(f"quantile must lie in (0,1), got {q!r}")
    idx = min(n - 1, max(0, math.ceil(q * n) - 1))
    z = float(ndtri(0.5 + confidence / 2.0))
    half = z * math.sqrt(n * q * (1.0 - q))
    lo_idx = min(n - 1, max(0, math.floor(q * n - half) - 1))
    hi_idx = min(n - 1, max(0, math.ceil(q * n + half) - 1))
    return float(arr[idx]), float(arr[lo_idx]), float(arr[hi_idx])


def json_bytes(payload: dict) -> bytes:
    """Canonical JSON emission: sorted keys, two-space indent, LF, ASCII."""
    return (json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=True) + "\n").encode()


def curve_csv_bytes(report: CurveReport) -> bytes:
    """CSV rows (k, value, ci_low, ci_high), with a leading series column
    when the report carries more than one named series."""
    names = report.series_names()
    multi = len(names) > 1 or (names and names[0] is not None)
    lines = []
    if multi:
        lines.append("series,k,value,ci_low,ci_high")
        for p in report.points:
            lines.append(
                f"{p.series},{p.k},{fmt12(p.value)},{fmt12(p.ci_low)},{fmt12(p.ci_high)}"
            )
    else:
        lines.append("k,value,ci_low,ci_high")
        for p in report.points:
            lines.append(f"{p.k},{fmt12(p.value)},{fmt12(p.ci_low)},{fmt12(p.ci_high)}")
    return ("\n".join(lines) + "\n").encode()


def rows_csv_bytes(header, rows) -> bytes:
    """Emit a generic table: header names plus rows of cells through fmt12."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt12(c) for c in row))
    return ("\n".join(lines) + "\n").encode()

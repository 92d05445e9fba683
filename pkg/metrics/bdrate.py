# metrics/bdrate.py
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from scipy.interpolate import PchipInterpolator

from core.errors import UsageError

logger = logging.getLogger("metrics")

MIN_POINTS = 4


@dataclass(frozen=True)
class RdCurve:
    """(rate, quality) points. Lower-better qualities (distortions) set higher_is_better=False."""
    points: Tuple[Tuple[float, float], ...]
    higher_is_better: bool = True

    def __post_init__(self):
        pts = tuple((float(r), float(q)) for r, q in self.points)
        for r, q in pts:
            if not (r > 0 and math.isfinite(r)):
                raise UsageError(f"Rates must be positive and finite, got {r!r}.")
            if not math.isfinite(q):
                raise UsageError(f"Quality values must be finite, got {q!r}.")
        rates = [r for r, _ in pts]
        if len(set(rates)) != len(rates):
            raise UsageError("Curve has duplicate rate values.")
        object.__setattr__(self, "points", tuple(sorted(pts)))

    def __len__(self) -> int:
        return len(self.points)

    def oriented(self) -> Tuple[np.ndarray, np.ndarray]:
        """(quality, log10 rate) sorted by quality, quality flipped to higher-is-better."""
        q = np.array([p[1] for p in self.points])
        log_r = np.log10(np.array([p[0] for p in self.points]))
        if not self.higher_is_better:
            q = -q
        order = np.argsort(q, kind="stable")
        return q[order], log_r[order]


def _integral(q: np.ndarray, log_r: np.ndarray, lo: float, hi: float) -> float:
    """Integral over [lo, hi] of the fitted log-rate(quality) curve."""
    if q.size == MIN_POINTS:
        poly = np.polyint(np.polyfit(q, log_r, 3))
        return float(np.polyval(poly, hi) - np.polyval(poly, lo))
    return float(PchipInterpolator(q, log_r).integrate(lo, hi))


def _check(curve: RdCurve, name: str) -> Tuple[np.ndarray, np.ndarray]:
    if len(curve) < MIN_POINTS:
        raise UsageError(f"{name} curve has {len(curve)} points; BD-rate needs at least {MIN_POINTS}.")
    q, log_r = curve.oriented()
    if np.any(np.diff(q) == 0):
        raise UsageError(f"{name} curve has duplicate quality values.")
    return q, log_r


def bd_rate(test: RdCurve, anchor: RdCurve) -> float:
    """
    Average rate difference of `test` against `anchor` at equal quality, in
    percent; negative means the test curve needs less rate.

    Exactly four points get one cubic fit; five or more use a piecewise-cubic
    Hermite interpolant.
    """
    q_t, r_t = _check(test, "Test")
    q_a, r_a = _check(anchor, "Anchor")
    lo = max(q_t[0], q_a[0])
    hi = min(q_t[-1], q_a[-1])
    if not lo < hi:
        raise UsageError(f"Quality ranges do not overlap (common interval [{lo:g}, {hi:g}]).")
    avg_diff = (_integral(q_t, r_t, lo, hi) - _integral(q_a, r_a, lo, hi)) / (hi - lo)
    result = (10.0 ** avg_diff - 1.0) * 100.0
    logger.debug("bd_rate interval=[%g, %g] avg_log_diff=%g result=%.4f%%", lo, hi, avg_diff, result)
    return result


def curve_from_pairs(pairs: Sequence[Sequence[float]], *, higher_is_better: bool = True) -> RdCurve:
    return RdCurve(points=tuple((p[0], p[1]) for p in pairs), higher_is_better=higher_is_better)


def rd_points(results) -> List[Tuple[float, float]]:
    """(total rate bits, distortion) per rd_opt result, ready for a lower-better RdCurve."""
    return [(r.rate_bits + r.table_bits, r.distortion) for r in results]

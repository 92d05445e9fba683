# alignment/mmd.py
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from scipy.spatial.distance import cdist, pdist

from alignment.noise import NoiseSchedule, SampleSet, forward_noise
from core.conf import gfix_setting
from core.errors import ShapeMismatchError, UsageError

logger = logging.getLogger("alignment")


def _kernel_sum(x: np.ndarray, y: np.ndarray, bandwidth: float) -> float:
    k = np.exp(-cdist(x, y, "sqeuclidean") / (2.0 * bandwidth * bandwidth))
    # fsum is order-independent, which keeps mmd2(x, y) == mmd2(y, x) bit for bit
    return math.fsum(k.ravel())


def _check_pair(x: SampleSet, y: SampleSet) -> None:
    if x.dim != y.dim:
        raise ShapeMismatchError(f"Sample dimensions differ: {x.dim} vs {y.dim}.")
    if x.n < 2 or y.n < 2:
        raise UsageError(f"MMD needs at least 2 samples per set, got {x.n} and {y.n}.")


def median_bandwidth(x: SampleSet, y: SampleSet) -> float:
    """Median pairwise Euclidean distance of the pooled samples."""
    _check_pair(x, y)
    pooled = np.vstack([x.samples, y.samples])
    bw = float(np.median(pdist(pooled, "euclidean")))
    if not (bw > 0 and math.isfinite(bw)):
        logger.warning("Median heuristic gave bandwidth %r for %s/%s; using 1.0", bw, x.label, y.label)
        return 1.0
    return bw


def mmd2(x: SampleSet, y: SampleSet, bandwidth: Optional[float] = None, *, unbiased: bool = False) -> float:
    """
    Squared MMD with k(a, b) = exp(-||a - b||^2 / (2 bw^2)).

    The default V-statistic keeps the kernel diagonals and is clamped at 0.
    `unbiased=True` drops the diagonals (U-statistic) and may go negative.
    """
    _check_pair(x, y)
    bw = median_bandwidth(x, y) if bandwidth is None else float(bandwidth)
    if not (bw > 0 and math.isfinite(bw)):
        raise UsageError(f"Bandwidth must be positive, got {bandwidth!r}.")
    n, m = x.n, y.n
    sxx = _kernel_sum(x.samples, x.samples, bw)
    syy = _kernel_sum(y.samples, y.samples, bw)
    sxy = _kernel_sum(x.samples, y.samples, bw)
    if unbiased:
        # k(a, a) == 1 exactly
        return math.fsum([(sxx - n) / (n * (n - 1)), (syy - m) / (m * (m - 1)), -2.0 * sxy / (n * m)])
    return max(0.0, math.fsum([sxx / (n * n), syy / (m * m), -2.0 * sxy / (n * m)]))


@dataclass(frozen=True)
class ScanPoint:
    t: int
    mmd2: float
    normalized: float


def _t_list(t_list: Sequence[int], schedule: NoiseSchedule) -> List[int]:
    ts = list(t_list)
    if not ts:
        raise UsageError("t_list is empty.")
    return [schedule.check_step(t) for t in ts]


def mmd_scan(degraded: SampleSet, reference: SampleSet, schedule: NoiseSchedule, t_list: Sequence[int],
             bandwidth: Optional[float] = None, seed: Optional[int] = None, *,
             unbiased: bool = False) -> List[ScanPoint]:
    """
    mmd2(degraded, forward_noise(reference, t)) for each t, normalized by the
    maximum over the scan. The bandwidth is fixed once for the whole scan and
    every t reuses the same noise draw.
    """
    ts = _t_list(t_list, schedule)
    seed = gfix_setting("SEED") if seed is None else seed
    bw = median_bandwidth(degraded, reference) if bandwidth is None else float(bandwidth)
    values = [
        mmd2(degraded, forward_noise(reference, t, schedule, seed), bw, unbiased=unbiased)
        for t in ts
    ]
    peak = max(values)
    if peak > 0:
        normalized = [v / peak for v in values]
    else:
        normalized = [1.0] * len(values)
    points = [ScanPoint(t=t, mmd2=v, normalized=nv) for t, v, nv in zip(ts, values, normalized)]
    logger.info(
        "mmd_scan degraded=%s reference=%s points=%d bandwidth=%.6g argmin_t=%d",
        degraded.label, reference.label, len(points), bw, argmin_point(points).t,
    )
    return points


def argmin_point(points: Sequence[ScanPoint]) -> ScanPoint:
    # strict `<` keeps the smallest t among equal values once sorted by t
    best = None
    for p in sorted(points, key=lambda p: p.t):
        if best is None or p.mmd2 < best.mmd2:
            best = p
    return best


def select_stepsize(degraded: SampleSet, reference: SampleSet, schedule: NoiseSchedule, t_list: Sequence[int],
                    bandwidth: Optional[float] = None, seed: Optional[int] = None) -> int:
    return argmin_point(mmd_scan(degraded, reference, schedule, t_list, bandwidth, seed)).t


@dataclass(frozen=True)
class OffsetPoint:
    offset: int
    t: int
    mmd2: float
    normalized: float


def offset_profile(degraded: SampleSet, reference: SampleSet, schedule: NoiseSchedule, t_center: int,
                   offsets: Optional[Sequence[int]] = None, bandwidth: Optional[float] = None,
                   seed: Optional[int] = None) -> List[OffsetPoint]:
    """MMD at fixed offsets around a chosen step, offsets clipped to the schedule."""
    t_center = schedule.check_step(t_center)
    offsets = list(gfix_setting("STEPSIZE_OFFSETS") if offsets is None else offsets)
    if not offsets:
        raise UsageError("offsets is empty.")
    ts = [min(max(t_center + int(o), 0), schedule.total_steps - 1) for o in offsets]
    scan = mmd_scan(degraded, reference, schedule, ts, bandwidth, seed)
    return [
        OffsetPoint(offset=int(o), t=p.t, mmd2=p.mmd2, normalized=p.normalized)
        for o, p in zip(offsets, scan)
    ]

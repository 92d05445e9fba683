# rd_opt/optimizer.py
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from codec.groups import (
    ModulationGroup, QuantizedGroup, concat_group, dequantize, group_by_rank,
    noise_simulate, quantize, round_half_away,
)
from codec.pmf import build_pmf, empirical_rate, table_bits
from core.conf import gfix_setting
from core.errors import ShapeMismatchError, UsageError
from linalg.ops import as_matrix
from mlora.adapters import MloraAdapter, fit_modulation

logger = logging.getLogger("rd_opt")

RATE_PATHS = ("round", "noise")


@dataclass(frozen=True)
class RdConfig:
    """
    One R + lambda*D search. `step_grid=None` means the scale-aware default
    grid built from the closed-form maps.
    """
    lambda_: float
    step_grid: Optional[Tuple[float, ...]] = None
    refine: bool = False
    max_refine_passes: Optional[int] = None
    rate_path: str = "round"
    seed: Optional[int] = None

    def __post_init__(self):
        if not (isinstance(self.lambda_, (int, float)) and self.lambda_ >= 0 and math.isfinite(self.lambda_)):
            raise UsageError(f"lambda must be a finite number >= 0, got {self.lambda_!r}.")
        if self.step_grid is not None:
            grid = tuple(float(s) for s in self.step_grid)
            if not grid:
                raise UsageError("Step grid is empty.")
            if any(not (s > 0 and math.isfinite(s)) for s in grid):
                raise UsageError("Step grid values must be positive and finite.")
            if any(b <= a for a, b in zip(grid, grid[1:])):
                raise UsageError("Step grid must be strictly ascending.")
            object.__setattr__(self, "step_grid", grid)
        if self.rate_path not in RATE_PATHS:
            raise UsageError(f"rate_path must be one of {RATE_PATHS}, got {self.rate_path!r}.")
        if self.max_refine_passes is not None and self.max_refine_passes < 0:
            raise UsageError("max_refine_passes must be >= 0.")

    @property
    def refine_passes(self) -> int:
        if self.max_refine_passes is None:
            return int(gfix_setting("MAX_REFINE_PASSES"))
        return int(self.max_refine_passes)

    @property
    def rng_seed(self) -> int:
        return int(gfix_setting("SEED") if self.seed is None else self.seed)


@dataclass(frozen=True)
class RdCandidate:
    step: float
    rate_bits: float
    distortion: float
    objective: float


@dataclass
class RdResult:
    chosen_step: float
    groups: List[QuantizedGroup]
    rate_bits: float
    table_bits: int
    distortion: float
    objective: float
    lambda_: float
    candidates: List[RdCandidate] = field(default_factory=list)
    refine_moves: int = 0

    @property
    def layer_ids(self) -> List[str]:
        return [lid for q in self.groups for lid in q.layer_ids]

    def to_report(self) -> Dict:
        return {
            "lambda": self.lambda_,
            "chosen_step": self.chosen_step,
            "rate_bits": self.rate_bits,
            "table_bits": self.table_bits,
            "distortion": self.distortion,
            "objective": self.objective,
            "refine_moves": self.refine_moves,
            "layers": self.layer_ids,
            "groups": [
                {"rank": q.rank, "count": q.count, "symbols": int(q.symbols.size),
                 "nonzero": int(np.count_nonzero(q.symbols))}
                for q in self.groups
            ],
            "candidates": [
                {"step": c.step, "rate_bits": c.rate_bits, "distortion": c.distortion, "objective": c.objective}
                for c in self.candidates
            ],
        }


def default_step_grid(max_abs: float, *, size: Optional[int] = None,
                      span: Optional[Tuple[float, float]] = None) -> Tuple[float, ...]:
    """Geometric grid over span * max|M*|; an all-zero fit scales by 1."""
    size = int(gfix_setting("STEP_GRID_SIZE")) if size is None else size
    lo, hi = gfix_setting("STEP_GRID_SPAN") if span is None else span
    if size < 1 or not 0 < lo <= hi:
        raise UsageError(f"Step grid needs size >= 1 and 0 < lo <= hi, got size={size}, span={(lo, hi)}.")
    scale = float(max_abs) if max_abs > 0 and math.isfinite(max_abs) else 1.0
    return tuple(float(s) for s in np.geomspace(lo * scale, hi * scale, size))


# -------- objective pieces

def _check_aligned(adapters: Sequence[MloraAdapter], target_deltas: Sequence) -> List[np.ndarray]:
    if not adapters:
        raise UsageError("rd_fit needs at least one adapter.")
    if len(adapters) != len(target_deltas):
        raise ShapeMismatchError(
            f"{len(adapters)} adapters but {len(target_deltas)} target deltas."
        )
    return [as_matrix(t) for t in target_deltas]


def layer_distortion(adapter: MloraAdapter, target: np.ndarray, m_hat: np.ndarray) -> float:
    residual = target - adapter.a @ m_hat @ adapter.b
    return float(np.sum(residual * residual))


def groups_distortion(rank_groups: Sequence[Sequence[MloraAdapter]], targets: Dict[str, np.ndarray],
                      quantized: Sequence[QuantizedGroup]) -> float:
    total = 0.0
    for members, q in zip(rank_groups, quantized):
        for ad, m_hat in zip(members, dequantize(q).maps):
            total += layer_distortion(ad, targets[ad.layer_id], m_hat)
    return total


def groups_rate(quantized: Sequence[QuantizedGroup]) -> float:
    return float(sum(empirical_rate(q.symbols) for q in quantized))


def noise_rate(fitted: Sequence[ModulationGroup], step: float, seed: int) -> float:
    """Rate of the uniform-noise stand-in for rounding, read off at the grid step."""
    total = 0.0
    for i, g in enumerate(fitted):
        noisy = noise_simulate(g, step, seed + i)
        total += empirical_rate(round_half_away(noisy.values() / step).astype(np.int64))
    return total


def _table_bits(quantized: Sequence[QuantizedGroup]) -> int:
    return int(sum(table_bits(build_pmf(q.symbols)) for q in quantized))


# -------- search

def rd_fit(adapters: Sequence[MloraAdapter], target_deltas: Sequence, cfg: RdConfig) -> RdResult:
    targets_list = _check_aligned(adapters, target_deltas)
    targets = {ad.layer_id: t for ad, t in zip(adapters, targets_list)}
    if len(targets) != len(adapters):
        raise UsageError("Layer ids must be unique within one fit.")

    fitted_adapters = [ad.with_modulation(fit_modulation(ad, targets[ad.layer_id])) for ad in adapters]
    rank_groups = group_by_rank(fitted_adapters)
    fitted = [concat_group(members) for members in rank_groups]

    grid = cfg.step_grid
    if grid is None:
        max_abs = max(float(np.max(np.abs(g.values()))) for g in fitted)
        grid = default_step_grid(max_abs)

    lam = float(cfg.lambda_)
    candidates: List[RdCandidate] = []
    best: Optional[Tuple[RdCandidate, List[QuantizedGroup]]] = None
    for step in grid:
        quantized = [quantize(g, step) for g in fitted]
        if cfg.rate_path == "noise":
            rate = noise_rate(fitted, step, cfg.rng_seed)
        else:
            rate = groups_rate(quantized)
        dist = groups_distortion(rank_groups, targets, quantized)
        cand = RdCandidate(step=float(step), rate_bits=rate, distortion=dist, objective=rate + lam * dist)
        candidates.append(cand)
        # ascending grid: `<=` hands ties to the larger step
        if best is None or cand.objective <= best[0].objective:
            best = (cand, quantized)

    chosen, quantized = best
    rate = groups_rate(quantized) if cfg.rate_path == "noise" else chosen.rate_bits
    dist = chosen.distortion
    objective = rate + lam * dist
    moves = 0

    if cfg.refine and cfg.refine_passes > 0:
        refined = []
        for members, g, q in zip(rank_groups, fitted, quantized):
            weight = np.concatenate([np.repeat(ad.singular_values ** 2, q.rank) for ad in members])
            symbols, n_moves = refine_symbols(q, g.values(), weight, lam, cfg.refine_passes)
            moves += n_moves
            refined.append(replace(q, symbols=symbols))
        if moves:
            r_rate = groups_rate(refined)
            r_dist = groups_distortion(rank_groups, targets, refined)
            r_obj = r_rate + lam * r_dist
            if r_obj <= objective:
                quantized, rate, dist, objective = refined, r_rate, r_dist, r_obj
            else:
                logger.warning("Refinement did not lower the recomputed objective; keeping the grid choice.")
                moves = 0

    result = RdResult(
        chosen_step=chosen.step,
        groups=list(quantized),
        rate_bits=rate,
        table_bits=_table_bits(quantized),
        distortion=dist,
        objective=objective,
        lambda_=lam,
        candidates=candidates,
        refine_moves=moves,
    )
    logger.info(
        "rd_fit lambda=%g layers=%d groups=%d step=%g rate_bits=%.1f distortion=%.6g refine_moves=%d",
        lam, len(adapters), len(quantized), result.chosen_step, rate, dist, moves,
    )
    return result


def _xlog2x(c: int) -> float:
    return c * math.log2(c) if c > 0 else 0.0


def refine_symbols(q: QuantizedGroup, target: np.ndarray, weight: np.ndarray, lam: float,
                   passes: int) -> Tuple[np.ndarray, int]:
    """
    Greedy +/-1 moves over the group's scan order. A move is taken only when
    it strictly lowers rate + lam * distortion; between -1 and +1 the larger
    drop wins, the move toward zero on ties.

    Rate change comes from the two histogram counts a move touches
    (N log2 N - sum c log2 c). Distortion change uses
    ||T - a M b||^2 = ||T - a M* b||^2 + sum_ij d_i^2 (M*_ij - M_ij)^2,
    so `weight` holds d_i^2 for every scan position.
    """
    symbols = q.symbols.copy()
    step = q.step
    values, counts = np.unique(symbols, return_counts=True)
    hist = dict(zip(values.tolist(), counts.tolist()))
    threshold = 1e-12 * max(1.0, empirical_rate(symbols))
    moves = 0
    for _ in range(passes):
        moved = False
        for k in range(symbols.size):
            s = int(symbols[k])
            c_s = hist[s]
            err_now = (target[k] - s * step) ** 2
            best_delta, best_to = 0.0, None
            for to in sorted((s - 1, s + 1), key=abs):
                c_to = hist.get(to, 0)
                d_rate = _xlog2x(c_s) - _xlog2x(c_s - 1) + _xlog2x(c_to) - _xlog2x(c_to + 1)
                delta = d_rate + lam * weight[k] * ((target[k] - to * step) ** 2 - err_now)
                if delta < best_delta - threshold:
                    best_delta, best_to = delta, to
            if best_to is None:
                continue
            symbols[k] = best_to
            hist[s] = c_s - 1
            if not hist[s]:
                del hist[s]
            hist[best_to] = hist.get(best_to, 0) + 1
            moves += 1
            moved = True
        if not moved:
            break
    return symbols, moves


def rd_curve(adapters: Sequence[MloraAdapter], target_deltas: Sequence,
             lambdas: Optional[Sequence[float]] = None, cfg: Optional[RdConfig] = None) -> List[RdResult]:
    """One rd_fit per lambda, in the order given. Lambdas must be distinct and positive."""
    lambdas = list(gfix_setting("DEFAULT_LAMBDAS") if lambdas is None else lambdas)
    if not lambdas:
        raise UsageError("rd_curve needs at least one lambda.")
    if any(not (lam > 0) for lam in lambdas):
        raise UsageError("Every lambda of a curve must be positive.")
    if len(set(lambdas)) != len(lambdas):
        raise UsageError(f"Duplicate lambda values in {lambdas}.")
    base = cfg or RdConfig(lambda_=float(lambdas[0]))
    return [rd_fit(adapters, target_deltas, replace(base, lambda_=float(lam))) for lam in lambdas]

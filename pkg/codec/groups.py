# codec/groups.py
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from core.errors import RankMismatchError, ShapeMismatchError, UsageError

logger = logging.getLogger("codec")

SYMBOL_LIMIT = 2**31 - 1


@dataclass(frozen=True)
class ModulationGroup:
    """Modulation maps of the layers sharing rank r, in transmission order."""
    rank: int
    maps: Tuple[np.ndarray, ...]
    layer_ids: Tuple[str, ...]

    def __post_init__(self):
        if len(self.maps) != len(self.layer_ids) or not self.maps:
            raise UsageError("A modulation group needs one layer id per map and at least one map.")
        for lid, m in zip(self.layer_ids, self.maps):
            if np.shape(m) != (self.rank, self.rank):
                raise RankMismatchError(f"Map for {lid!r} is {np.shape(m)}, expected {self.rank}x{self.rank}.")

    @property
    def count(self) -> int:
        return len(self.maps)

    def stacked(self) -> np.ndarray:
        """(count, r, r) array; its row-major ravel is the transmission scan order."""
        return np.stack([np.asarray(m, dtype=np.float64) for m in self.maps])

    def values(self) -> np.ndarray:
        return self.stacked().ravel()


@dataclass(frozen=True)
class QuantizedGroup:
    symbols: np.ndarray  # int64, length r*r*count, channel-major
    step: float
    rank: int
    count: int
    layer_ids: Tuple[str, ...]

    def __post_init__(self):
        if not self.step > 0:
            raise UsageError(f"Quantization step must be positive, got {self.step}.")
        if self.symbols.shape != (self.rank * self.rank * self.count,):
            raise ShapeMismatchError(
                f"Expected {self.rank * self.rank * self.count} symbols, got {self.symbols.shape}."
            )
        if len(self.layer_ids) != self.count:
            raise UsageError("layer_ids must list one id per map.")

    def __eq__(self, other) -> bool:
        if not isinstance(other, QuantizedGroup):
            return NotImplemented
        return (
            self.step == other.step and self.rank == other.rank and self.count == other.count
            and tuple(self.layer_ids) == tuple(other.layer_ids)
            and np.array_equal(self.symbols, other.symbols)
        )

    __hash__ = None


def concat_group(adapters: Sequence) -> ModulationGroup:
    """Stack the modulation maps of adapters that share one rank, order preserved."""
    if not adapters:
        raise UsageError("concat_group needs at least one adapter.")
    ranks = {ad.rank for ad in adapters}
    if len(ranks) != 1:
        raise RankMismatchError(f"Adapters in one group must share a rank, got {sorted(ranks)}.")
    return ModulationGroup(
        rank=adapters[0].rank,
        maps=tuple(np.array(ad.m_map, dtype=np.float64) for ad in adapters),
        layer_ids=tuple(ad.layer_id for ad in adapters),
    )


def split_group(group: ModulationGroup) -> Dict[str, np.ndarray]:
    return {lid: np.array(m, dtype=np.float64) for lid, m in zip(group.layer_ids, group.maps)}


def group_by_rank(adapters: Iterable) -> List[list]:
    """Partition adapters into rank groups, groups and members in first-appearance order."""
    buckets: Dict[int, list] = {}
    for ad in adapters:
        buckets.setdefault(ad.rank, []).append(ad)
    return list(buckets.values())


def round_half_away(x: np.ndarray) -> np.ndarray:
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def quantize(g: ModulationGroup, step: float) -> QuantizedGroup:
    if not step > 0:
        raise UsageError(f"Quantization step must be positive, got {step}.")
    scaled = round_half_away(g.values() / step)
    if scaled.size and np.max(np.abs(scaled)) > SYMBOL_LIMIT:
        raise UsageError(f"Step {step:g} produces symbols beyond +/-{SYMBOL_LIMIT}; use a larger step.")
    return QuantizedGroup(
        symbols=scaled.astype(np.int64),
        step=float(step),
        rank=g.rank,
        count=g.count,
        layer_ids=tuple(g.layer_ids),
    )


def dequantize(q: QuantizedGroup) -> ModulationGroup:
    cube = (q.symbols.astype(np.float64) * q.step).reshape(q.count, q.rank, q.rank)
    return ModulationGroup(rank=q.rank, maps=tuple(cube), layer_ids=tuple(q.layer_ids))


def noise_simulate(g: ModulationGroup, step: float, seed: int) -> ModulationGroup:
    """Additive uniform noise step * U(-0.5, 0.5): the training-time stand-in for rounding."""
    if not step > 0:
        raise UsageError(f"Quantization step must be positive, got {step}.")
    rng = np.random.default_rng(seed)
    cube = g.stacked()
    noisy = cube + step * rng.uniform(-0.5, 0.5, size=cube.shape)
    return ModulationGroup(rank=g.rank, maps=tuple(noisy), layer_ids=tuple(g.layer_ids))

# mlora/adapters.py
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, replace
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from core.conf import gfix_setting
from core.errors import IllConditionedError, NonFiniteError, ShapeMismatchError, UsageError
from linalg.ops import as_matrix
from linalg.svd import svd, truncate
from tensor_store.archive import Tensor, TensorArchive

logger = logging.getLogger("mlora")


@dataclass(frozen=True)
class MloraAdapter:
    """
    Frozen low-rank factors a = U_r diag(d_r), b = V_r^T of a base weight plus
    the r x r modulation map. The update it represents is a @ m_map @ b.
    """
    layer_id: str
    a: np.ndarray      # m x r
    b: np.ndarray      # r x n
    m_map: np.ndarray  # r x r
    rank: int
    base_shape: Tuple[int, int]

    def __post_init__(self):
        m, n = self.base_shape
        r = self.rank
        if self.a.shape != (m, r) or self.b.shape != (r, n) or self.m_map.shape != (r, r):
            raise ShapeMismatchError(
                f"Adapter {self.layer_id!r}: inconsistent shapes a={self.a.shape} "
                f"m_map={self.m_map.shape} b={self.b.shape} for base {self.base_shape}, rank {r}."
            )

    @property
    def singular_values(self) -> np.ndarray:
        # columns of a are U_r scaled by d_r
        return np.linalg.norm(self.a, axis=0)

    def with_modulation(self, m_map) -> "MloraAdapter":
        return replace(self, m_map=np.array(m_map, dtype=np.float64))


def _check_conditioning(d: np.ndarray, rtol: float, layer_id: str) -> None:
    d_max = float(d[0]) if d.size else 0.0
    bad = np.flatnonzero(~(d > rtol * d_max)) if d_max > 0 else np.arange(d.size)
    if bad.size:
        idx = int(bad[0])
        raise IllConditionedError(
            f"Layer {layer_id!r}: kept singular value #{idx} ({d[idx]:.3e}) is below "
            f"{rtol:g} x d_max ({d_max:.3e}); lower the rank.",
            index=idx,
        )


def init_adapter(w0, r: int, *, layer_id: str = "layer", rtol: Optional[float] = None) -> MloraAdapter:
    """Truncated-SVD initialization: a = U_r D_r, b = V_r^T, m_map = 0."""
    rtol = gfix_setting("ILL_CONDITION_RTOL") if rtol is None else rtol
    w0 = as_matrix(w0)
    m, n = w0.shape
    if not isinstance(r, (int, np.integer)) or not 1 <= r <= min(m, n):
        raise UsageError(f"Layer {layer_id!r}: rank must be in [1, {min(m, n)}], got {r}.")

    f = truncate(svd(w0), int(r))
    _check_conditioning(f.d, rtol, layer_id)
    adapter = MloraAdapter(
        layer_id=layer_id,
        a=f.u * f.d,
        b=f.v.T.copy(),
        m_map=np.zeros((r, r)),
        rank=int(r),
        base_shape=(m, n),
    )
    logger.debug("init_adapter layer=%s base=%sx%s rank=%d", layer_id, m, n, r)
    return adapter


def delta(adapter: MloraAdapter) -> np.ndarray:
    return adapter.a @ adapter.m_map @ adapter.b


def apply(w0, adapter: MloraAdapter) -> np.ndarray:
    w0 = as_matrix(w0)
    if tuple(w0.shape) != tuple(adapter.base_shape):
        raise ShapeMismatchError(
            f"Layer {adapter.layer_id!r}: base is {w0.shape} but adapter expects {adapter.base_shape}."
        )
    return w0 + delta(adapter)


def fit_modulation(adapter: MloraAdapter, target_delta, *, rtol: Optional[float] = None) -> np.ndarray:
    """
    Least-squares modulation map: argmin_M ||target - a M b||_F.

    With a = U_r D_r and b = V_r^T this is D_r^-1 U_r^T target V_r, computed
    here as D_r^-2 a^T target b^T.
    """
    rtol = gfix_setting("ILL_CONDITION_RTOL") if rtol is None else rtol
    target = as_matrix(target_delta)
    if tuple(target.shape) != tuple(adapter.base_shape):
        raise ShapeMismatchError(
            f"Layer {adapter.layer_id!r}: target delta is {target.shape}, expected {adapter.base_shape}."
        )
    if not np.all(np.isfinite(target)):
        raise NonFiniteError(f"Layer {adapter.layer_id!r}: target delta contains NaN or Inf.")
    d = adapter.singular_values
    _check_conditioning(d, rtol, adapter.layer_id)
    return (adapter.a.T @ target @ adapter.b.T) / (d * d)[:, None]


def fit_lora_baseline(target_delta, r: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Vanilla LoRA counterpart at the same rank: the best rank-r factors
    (A: m x r, B: r x n) of the target delta itself. Transmits r(m+n) values.
    """
    target = as_matrix(target_delta)
    if not isinstance(r, (int, np.integer)) or not 1 <= r <= min(target.shape):
        raise UsageError(f"rank must be in [1, {min(target.shape)}], got {r}.")
    f = truncate(svd(target), int(r))
    return f.u * f.d, f.v.T.copy()


def fit_error(adapter: MloraAdapter, target_delta, m_map=None) -> float:
    """||target - a M b||_F^2 for the given (or the adapter's own) modulation map."""
    m_map = adapter.m_map if m_map is None else m_map
    residual = as_matrix(target_delta) - adapter.a @ np.asarray(m_map) @ adapter.b
    return float(np.sum(residual * residual))


# -------- archive layout: <layer_id>.A / .B / .M plus <layer_id>.rank / .base_shape

def adapters_to_archive(adapters: Iterable[MloraAdapter], *, dtype=np.float64,
                        extra_metadata: Optional[Dict[str, str]] = None) -> TensorArchive:
    archive = TensorArchive(metadata=dict(extra_metadata or {}))
    layer_ids: List[str] = []
    for ad in adapters:
        archive.add(Tensor(f"{ad.layer_id}.A", ad.a.astype(dtype)))
        archive.add(Tensor(f"{ad.layer_id}.B", ad.b.astype(dtype)))
        archive.add(Tensor(f"{ad.layer_id}.M", ad.m_map.astype(dtype)))
        archive.metadata[f"{ad.layer_id}.rank"] = str(ad.rank)
        archive.metadata[f"{ad.layer_id}.base_shape"] = json.dumps(list(ad.base_shape))
        layer_ids.append(ad.layer_id)
    archive.metadata["layers"] = json.dumps(layer_ids)
    return archive


def adapters_from_archive(archive: TensorArchive) -> List[MloraAdapter]:
    try:
        layer_ids = json.loads(archive.metadata.get("layers", "[]"))
    except ValueError as exc:
        raise UsageError("Adapter archive has an unreadable 'layers' entry.") from exc
    out = []
    for lid in layer_ids:
        rank = int(archive.metadata[f"{lid}.rank"])
        base_shape = tuple(json.loads(archive.metadata[f"{lid}.base_shape"]))
        out.append(MloraAdapter(
            layer_id=lid,
            a=archive.get(f"{lid}.A").data.astype(np.float64),
            b=archive.get(f"{lid}.B").data.astype(np.float64),
            m_map=archive.get(f"{lid}.M").data.astype(np.float64),
            rank=rank,
            base_shape=base_shape,
        ))
    return out

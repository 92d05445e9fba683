# cli/pipeline.py
"""
Library-level workflows behind the gfix subcommands. Each function reads and
returns in-memory archives so commands stay thin and tests can call the same
code the commands run.
"""
from __future__ import annotations

import json
import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from codec.groups import QuantizedGroup, dequantize
from core.conf import gfix_version
from core.errors import ShapeMismatchError, UsageError
from metrics.quality import psnr, psnr_label
from mlora.adapters import MloraAdapter, adapters_from_archive, adapters_to_archive, apply, init_adapter
from mlora.sizing import Layer
from rd_opt.optimizer import RdConfig, RdResult, rd_curve, rd_fit
from tensor_store.archive import Tensor, TensorArchive, reshape_2d, restore_shape

logger = logging.getLogger("cli")


def _layer_matrix(archive: TensorArchive, layer: dict, role: str) -> np.ndarray:
    if layer["name"] not in archive:
        raise UsageError(f"Layer {layer['name']!r} is not in the {role} archive.")
    return reshape_2d(archive.get(layer["name"]), layer["split_axis"])


def layer_dims(base: TensorArchive, manifest: dict) -> List[Layer]:
    dims = []
    for layer in manifest["layers"]:
        m, n = _layer_matrix(base, layer, "base").shape
        dims.append((m, n, layer["rank"]))
    return dims


def decompose(base: TensorArchive, manifest: dict) -> List[MloraAdapter]:
    adapters = [
        init_adapter(_layer_matrix(base, layer, "base"), layer["rank"], layer_id=layer["name"])
        for layer in manifest["layers"]
    ]
    if not adapters:
        logger.warning("Manifest selects no layers; the adapter archive will be empty.")
    else:
        logger.info("Decomposed %d layers", len(adapters))
    return adapters


def adapters_archive(adapters: Sequence[MloraAdapter]) -> TensorArchive:
    return adapters_to_archive(adapters, extra_metadata={"gfix_version": gfix_version()})


def load_adapters(base: TensorArchive, manifest: dict, adapters: Optional[TensorArchive]) -> List[MloraAdapter]:
    """Adapters from a decompose archive when given, recomputed from the base otherwise."""
    if adapters is None:
        return decompose(base, manifest)
    by_id = {ad.layer_id: ad for ad in adapters_from_archive(adapters)}
    out = []
    for layer in manifest["layers"]:
        ad = by_id.get(layer["name"])
        if ad is None:
            raise UsageError(f"Layer {layer['name']!r} is not in the adapter archive.")
        if ad.rank != layer["rank"]:
            raise ShapeMismatchError(
                f"Layer {layer['name']!r}: adapter rank {ad.rank} but manifest asks for {layer['rank']}."
            )
        out.append(ad)
    return out


def target_deltas(base: TensorArchive, target: TensorArchive, manifest: dict) -> List[np.ndarray]:
    deltas = []
    for layer in manifest["layers"]:
        w0 = _layer_matrix(base, layer, "base")
        w1 = _layer_matrix(target, layer, "target")
        if w0.shape != w1.shape:
            raise ShapeMismatchError(
                f"Layer {layer['name']!r}: base is {w0.shape} but target is {w1.shape}."
            )
        deltas.append(w1.astype(np.float64) - w0.astype(np.float64))
    return deltas


def rd_config(manifest: dict, lambda_: float, grid: Optional[Sequence[float]] = None) -> RdConfig:
    grid = grid if grid is not None else manifest.get("grid")
    return RdConfig(
        lambda_=float(lambda_),
        step_grid=tuple(grid) if grid else None,
        refine=manifest.get("refine", False),
        max_refine_passes=manifest.get("max_refine_passes"),
        rate_path=manifest.get("rate_path", "round"),
        seed=manifest.get("seed"),
    )


def fit(base: TensorArchive, target: TensorArchive, manifest: dict, lambda_: float, *,
        grid: Optional[Sequence[float]] = None, adapters: Optional[TensorArchive] = None) -> RdResult:
    if not manifest["layers"]:
        raise UsageError("Manifest selects no layers; nothing to fit.")
    ads = load_adapters(base, manifest, adapters)
    return rd_fit(ads, target_deltas(base, target, manifest), rd_config(manifest, lambda_, grid))


def curve(base: TensorArchive, target: TensorArchive, manifest: dict,
          lambdas: Optional[Sequence[float]] = None, *, grid: Optional[Sequence[float]] = None,
          adapters: Optional[TensorArchive] = None) -> List[RdResult]:
    if not manifest["layers"]:
        raise UsageError("Manifest selects no layers; nothing to fit.")
    lambdas = list(lambdas) if lambdas is not None else list(manifest["lambdas"])
    ads = load_adapters(base, manifest, adapters)
    cfg = rd_config(manifest, lambdas[0] if lambdas else 0.0, grid)
    return rd_curve(ads, target_deltas(base, target, manifest), lambdas, cfg)


def maps_archive(groups: Sequence[QuantizedGroup]) -> TensorArchive:
    """Dequantized maps (step * symbols) as <layer>.M entries, step and rank in metadata."""
    archive = TensorArchive(metadata={"gfix_version": gfix_version()})
    layer_ids: List[str] = []
    for q in groups:
        g = dequantize(q)
        for lid, m_hat in zip(g.layer_ids, g.maps):
            archive.add(Tensor(f"{lid}.M", m_hat))
            archive.metadata[f"{lid}.step"] = repr(q.step)
            archive.metadata[f"{lid}.rank"] = str(q.rank)
            layer_ids.append(lid)
    archive.metadata["layers"] = json.dumps(layer_ids)
    return archive


def apply_maps(base: TensorArchive, maps: TensorArchive, manifest: dict, *,
               adapters: Optional[TensorArchive] = None) -> Tuple[TensorArchive, Dict[str, np.ndarray]]:
    """
    Reconstructed weights: every base tensor, with each manifest layer replaced
    by base + a M_hat b (stored as f64). Also returns the reconstructed matrices.
    """
    ads = load_adapters(base, manifest, adapters)
    rebuilt: Dict[str, np.ndarray] = {}
    for layer, ad in zip(manifest["layers"], ads):
        key = f"{layer['name']}.M"
        if key not in maps:
            raise UsageError(f"No modulation map for layer {layer['name']!r} in the maps archive.")
        m_hat = maps.get(key).data
        if m_hat.shape != (ad.rank, ad.rank):
            raise ShapeMismatchError(
                f"Layer {layer['name']!r}: map is {list(m_hat.shape)} but the manifest rank is {ad.rank}."
            )
        rebuilt[layer["name"]] = apply(_layer_matrix(base, layer, "base"), ad.with_modulation(m_hat))

    out = TensorArchive(metadata={"gfix_version": gfix_version(), "layers": json.dumps(list(rebuilt))})
    for t in base:
        if t.name in rebuilt:
            out.add(Tensor(t.name, restore_shape(rebuilt[t.name], t.shape)))
        else:
            out.add(t)
    logger.info("Applied %d modulation maps over %d base tensors", len(rebuilt), len(base))
    return out, rebuilt


def psnr_rows(rebuilt: Dict[str, np.ndarray], target: TensorArchive, manifest: dict,
              peak: Optional[float] = None) -> List[dict]:
    rows = []
    for layer in manifest["layers"]:
        ref = _layer_matrix(target, layer, "target")
        rows.append({"layer": layer["name"], "psnr_db": psnr_label(psnr(rebuilt[layer["name"]], ref, peak))})
    return rows

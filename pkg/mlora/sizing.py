# mlora/sizing.py
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Optional, Tuple

import numpy as np

from core.errors import UsageError

MEGABYTE = 1_000_000

DTYPE_WIDTH = {"f16": 2, "f32": 4, "f64": 8}

Layer = Tuple[int, int, int]  # (m, n, r)


@dataclass(frozen=True)
class SizeReport:
    lora_params: int
    mlora_params: int
    lora_bytes: int
    mlora_bytes: int
    ratio: float
    dtype: str = "f32"

    def megabytes(self) -> Tuple[float, float]:
        return self.lora_bytes / MEGABYTE, self.mlora_bytes / MEGABYTE


def size_report(layers: Iterable[Layer], dtype: str = "f32") -> SizeReport:
    """
    LoRA transmits r(m+n) values per layer (A and B); mLoRA transmits r^2 (M).
    The ratio is reported as-is, so r > (m+n) layers show mLoRA as larger.
    """
    if dtype not in DTYPE_WIDTH:
        raise UsageError(f"Unknown dtype {dtype!r}; expected one of {sorted(DTYPE_WIDTH)}.")
    lora = 0
    mlora = 0
    for m, n, r in layers:
        if min(m, n, r) < 1:
            raise UsageError(f"Layer dims must be positive, got (m={m}, n={n}, r={r}).")
        lora += r * (m + n)
        mlora += r * r
    width = DTYPE_WIDTH[dtype]
    ratio = lora / mlora if mlora else float("nan")
    return SizeReport(
        lora_params=lora,
        mlora_params=mlora,
        lora_bytes=lora * width,
        mlora_bytes=mlora * width,
        ratio=ratio,
        dtype=dtype,
    )


def size_table(report: SizeReport, *, coded_bytes: Optional[int] = None,
               reference_bytes: Optional[int] = None) -> List[dict]:
    """
    Ablation-style rows: raw LoRA, raw mLoRA and, when known, the entropy-coded
    stream. `reference_bytes` (e.g. the base codec's own stream) adds each
    row's share of it.
    """
    rows = [
        {"method": "LoRA", "bytes": report.lora_bytes},
        {"method": "mLoRA", "bytes": report.mlora_bytes},
    ]
    if coded_bytes is not None:
        rows.append({"method": "mLoRA + entropy model", "bytes": int(coded_bytes)})
    for row in rows:
        row["megabytes"] = round(row["bytes"] / MEGABYTE, 6)
        if reference_bytes:
            row["share_of_reference"] = round(row["bytes"] / reference_bytes, 6)
    return rows


def layers_for_ratio(target_ratio: float, rank: int, count: int = 1) -> List[Layer]:
    """
    Square layers whose LoRA/mLoRA ratio is as close to `target_ratio` as integer
    dims allow: ratio = 2m/r, so m = round(target_ratio * r / 2).
    """
    if target_ratio <= 0 or rank < 1 or count < 1:
        raise UsageError("target_ratio, rank and count must be positive.")
    m = max(1, int(np.rint(target_ratio * rank / 2)))
    return [(m, m, rank)] * count

# metrics/quality.py
from __future__ import annotations

import math
from typing import Optional, Union

import numpy as np
from skimage.metrics import peak_signal_noise_ratio

from core.conf import gfix_setting
from core.errors import ShapeMismatchError, UsageError

IDENTICAL = "identical"


def _values(x) -> np.ndarray:
    # accepts tensor_store Tensors as well as plain arrays
    return np.asarray(getattr(x, "data", x), dtype=np.float64)


def psnr(a, b, peak: Optional[float] = None) -> float:
    """10 log10(peak^2 / MSE) in dB; math.inf when the inputs are identical."""
    peak = gfix_setting("PSNR_PEAK") if peak is None else peak
    if not (peak > 0 and math.isfinite(peak)):
        raise UsageError(f"Peak must be positive, got {peak!r}.")
    a, b = _values(a), _values(b)
    if a.shape != b.shape:
        raise ShapeMismatchError(f"PSNR inputs differ in shape: {a.shape} vs {b.shape}.")
    if not a.size:
        raise UsageError("PSNR of empty inputs is undefined.")
    if np.array_equal(a, b):
        return math.inf
    return float(peak_signal_noise_ratio(a, b, data_range=peak))


def psnr_label(value: float) -> Union[str, float]:
    """Serializable form: the identical-signal sentinel becomes the string "identical"."""
    if math.isinf(value) and value > 0:
        return IDENTICAL
    return round(float(value), 4)

# core/conf.py
from __future__ import annotations
from typing import Any

from django.conf import settings

# Used when the library is imported without Django settings (plain scripts).
DEFAULTS: dict[str, Any] = {
    "SEED": 1234,
    "SVD_TOLERANCE": 1e-12,
    "SVD_MAX_SWEEPS": 60,
    "ILL_CONDITION_RTOL": 1e-12,
    "PMF_PRECISION_BITS": 16,
    "MAX_GROUP_SYMBOLS": 1 << 28,
    "DEFAULT_LAMBDAS": [0.03, 0.025, 0.01, 0.005, 0.002],
    "STEP_GRID_SIZE": 24,
    "STEP_GRID_SPAN": (1e-4, 1e1),
    "MAX_REFINE_PASSES": 4,
    "SCHEDULE_STEPS": 1000,
    "SCHEDULE_BETA_START": 1e-4,
    "SCHEDULE_BETA_END": 0.02,
    "STEPSIZE_OFFSETS": [-20, -15, -10, 0, 10, 20, 50],
    "PSNR_PEAK": 1.0,
}

DEFAULT_VERSION = "1.0.0"


def gfix_setting(key: str) -> Any:
    """Look up a key of settings.GFIX, falling back to the built-in default."""
    if not settings.configured:
        return DEFAULTS[key]
    return getattr(settings, "GFIX", {}).get(key, DEFAULTS[key])


def gfix_version() -> str:
    if not settings.configured:
        return DEFAULT_VERSION
    return getattr(settings, "GFIX_VERSION", DEFAULT_VERSION)

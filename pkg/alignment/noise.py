# alignment/noise.py
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from core.conf import gfix_setting
from core.errors import NonFiniteError, ShapeMismatchError, UsageError

logger = logging.getLogger("alignment")


@dataclass(frozen=True, eq=False)
class NoiseSchedule:
    """Variance schedule of a forward diffusion process, indexed t = 0 .. T-1."""
    betas: np.ndarray
    alpha_bars: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        betas = np.array(self.betas, dtype=np.float64).ravel()
        if not betas.size:
            raise UsageError("A noise schedule needs at least one step.")
        if np.any(~(betas > 0)) or np.any(~(betas < 1)):
            raise UsageError("Schedule betas must lie in (0, 1).")
        betas.setflags(write=False)
        object.__setattr__(self, "betas", betas)
        alpha_bars = np.cumprod(1.0 - betas)
        alpha_bars.setflags(write=False)
        object.__setattr__(self, "alpha_bars", alpha_bars)

    @classmethod
    def linear(cls, total_steps: Optional[int] = None, beta_start: Optional[float] = None,
               beta_end: Optional[float] = None) -> "NoiseSchedule":
        total_steps = int(gfix_setting("SCHEDULE_STEPS")) if total_steps is None else total_steps
        beta_start = gfix_setting("SCHEDULE_BETA_START") if beta_start is None else beta_start
        beta_end = gfix_setting("SCHEDULE_BETA_END") if beta_end is None else beta_end
        if total_steps < 1:
            raise UsageError("total_steps must be >= 1.")
        return cls(betas=np.linspace(beta_start, beta_end, total_steps))

    @property
    def total_steps(self) -> int:
        return int(self.betas.size)

    def check_step(self, t) -> int:
        if not isinstance(t, (int, np.integer)) or not 0 <= t < self.total_steps:
            raise UsageError(f"Step {t!r} is outside the schedule [0, {self.total_steps - 1}].")
        return int(t)


@dataclass(frozen=True, eq=False)
class SampleSet:
    """n flattened samples of dimension d."""
    samples: np.ndarray
    label: str = ""

    def __post_init__(self):
        x = np.array(self.samples, dtype=np.float64)
        if x.ndim == 1:
            x = x[:, None]
        if x.ndim != 2:
            raise ShapeMismatchError(f"Samples must be n x d, got shape {x.shape}.")
        if not np.all(np.isfinite(x)):
            raise NonFiniteError(f"Sample set {self.label!r} contains NaN or Inf.")
        x.setflags(write=False)
        object.__setattr__(self, "samples", x)

    @property
    def n(self) -> int:
        return int(self.samples.shape[0])

    @property
    def dim(self) -> int:
        return int(self.samples.shape[1])


def forward_noise(x0: SampleSet, t: int, schedule: NoiseSchedule, seed: Optional[int] = None) -> SampleSet:
    """x_t = sqrt(abar_t) x0 + sqrt(1 - abar_t) eps, eps ~ N(0, I) drawn from `seed`."""
    t = schedule.check_step(t)
    seed = gfix_setting("SEED") if seed is None else seed
    abar = float(schedule.alpha_bars[t])
    eps = np.random.default_rng(seed).standard_normal(x0.samples.shape)
    return SampleSet(
        samples=np.sqrt(abar) * x0.samples + np.sqrt(1.0 - abar) * eps,
        label=f"{x0.label}@t={t}",
    )

"""Surface pressure disturbances P(t, x)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spectral import Grid


@dataclass(frozen=True)
class PressureForcing:
    """Preset pressure fields; ``kind`` is none | traveling_bump | smooth_step.

    traveling_bump : p0 * exp(-(x - x0 - c t)^2 / ell^2), periodized
    smooth_step    : plateau of height p0 between x0 and x0 + width, edges of
                     tanh shape and width ell, moving at speed c
    """

    kind: str = "none"
    p0: float = 0.0
    c: float = 0.0
    ell: float = 1.0
    x0: float = math.pi
    width: float = math.pi
    ramp: float = 0.0   # optional smooth switch-on time

    def __post_init__(self):
        if self.kind not in ("none", "traveling_bump", "smooth_step"):
            raise ValueError(f"unknown forcing kind {self.kind!r}")
        if self.kind != "none" and not self.ell > 0:
            raise ValueError("ell must be > 0")

    @property
    def active(self):
        return self.kind != "none" and self.p0 != 0.0

    def value(self, t, grid: Grid):
        if not self.active:
            return np.zeros(grid.nx)
        L = grid.period
        xi = grid.x - self.x0 - self.c * t
        images = [xi + n * L for n in range(-3, 4)]
        if self.kind == "traveling_bump":
            p = sum(np.exp(-(y**2) / self.ell**2) for y in images)
        else:
            p = sum(0.5 * (np.tanh(y / self.ell) - np.tanh((y - self.width) / self.ell))
                    for y in images)
        return self.p0 * self._ramp(t) * p

    def gradient(self, t, grid: Grid):
        return grid.ddx(self.value(t, grid))

    def _ramp(self, t):
        if self.ramp <= 0:
            return 1.0
        return 0.5 * (1 - math.cos(math.pi * min(t / self.ramp, 1.0)))


NO_FORCING = PressureForcing()

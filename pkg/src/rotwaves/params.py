"""Dimensionless parameters, dimensional conversion and regime checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class RegimeError(ValueError):
    """Raised when parameters fall outside the admissible regime."""


class DepthError(RegimeError):
    """The depth fell below h_min; ``value`` is the offending minimum."""

    def __init__(self, value, h_min):
        self.value = value
        super().__init__(f"depth {value:.4g} below h_min={h_min}")


class GridMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class DimensionalScales:
    """Physical scales in SI units.

    a : surface amplitude (m), a_bott : bathymetry amplitude (m), H : depth (m),
    L : horizontal scale (m), f : Coriolis frequency (1/s), g : gravity (m/s^2).
    """

    a: float
    H: float
    L: float
    f: float
    a_bott: float = 0.0
    g: float = 9.81

    def __post_init__(self):
        for name in ("a", "H", "L", "f", "g"):
            if not getattr(self, name) > 0:
                raise RegimeError(f"{name} must be > 0, got {getattr(self, name)!r}")
        if not self.a_bott >= 0:
            raise RegimeError(f"a_bott must be >= 0, got {self.a_bott!r}")


def _constraints(eps, beta, mu, ro, mu_max):
    ratio = eps / ro
    return [
        ("0 < mu", mu > 0, mu),
        ("mu <= mu_max", mu <= mu_max, mu_max - mu),
        ("0 < eps", eps > 0, eps),
        ("eps <= 1", eps <= 1, 1 - eps),
        ("0 <= beta", beta >= 0, beta),
        ("beta <= 1", beta <= 1, 1 - beta),
        ("eps/ro <= 1", ratio <= 1, 1 - ratio),
    ]


@dataclass(frozen=True)
class Params:
    """Nondimensional numbers plus regime bounds.

    ``ro`` may be ``math.inf`` to switch the Coriolis terms off.
    """

    eps: float
    beta: float
    mu: float
    ro: float = math.inf
    mu_max: float = 1.0
    h_min: float = 0.05
    a_min: float = 0.1

    def __post_init__(self):
        if not self.ro > 0:
            raise RegimeError(f"ro must be > 0, got {self.ro!r}")
        if not (self.h_min > 0 and self.a_min > 0):
            raise RegimeError("h_min and a_min must be > 0")
        bad = [name for name, ok, _ in _constraints(
            self.eps, self.beta, self.mu, self.ro, self.mu_max) if not ok]
        if bad:
            raise RegimeError("violated: " + ", ".join(bad))

    @property
    def inv_ro(self) -> float:
        return 0.0 if math.isinf(self.ro) else 1.0 / self.ro

    @property
    def sqrt_mu(self) -> float:
        return math.sqrt(self.mu)

    def replace(self, **changes) -> "Params":
        from dataclasses import replace
        return replace(self, **changes)


@dataclass(frozen=True)
class RegimeReport:
    checks: tuple = field(default_factory=tuple)  # (name, passed, margin)

    @property
    def ok(self) -> bool:
        return all(passed for _, passed, _ in self.checks)

    def failures(self) -> list[str]:
        return [name for name, passed, _ in self.checks if not passed]

    def __str__(self):
        return "\n".join(f"{'PASS' if p else 'FAIL'} {n} (margin {m:+.3g})"
                         for n, p, m in self.checks)


def validate(eps, beta=None, mu=None, ro=None, mu_max=1.0) -> RegimeReport:
    """Check every regime inequality without raising.

    Accepts either a :class:`Params` or raw numbers (so that inadmissible
    combinations can be reported rather than rejected).
    """
    if isinstance(eps, Params):
        p = eps
        eps, beta, mu, ro, mu_max = p.eps, p.beta, p.mu, p.ro, p.mu_max
    beta = 0.0 if beta is None else beta
    ro = math.inf if ro is None else ro
    return RegimeReport(tuple(_constraints(eps, beta, mu, ro, mu_max)))


def from_dimensional(scales: DimensionalScales, **bounds) -> Params:
    """eps = a/H, beta = a_bott/H, mu = H^2/L^2, ro = a/(f L) sqrt(g/H)."""
    s = scales
    eps = s.a / s.H
    beta = s.a_bott / s.H
    mu = s.H**2 / s.L**2
    ro = s.a / (s.f * s.L) * math.sqrt(s.g / s.H)
    report = validate(eps, beta, mu, ro, bounds.get("mu_max", 1.0))
    if not report.ok:
        raise RegimeError("violated: " + ", ".join(report.failures()))
    return Params(eps=eps, beta=beta, mu=mu, ro=ro, **bounds)


@dataclass(frozen=True)
class DepthFloor:
    value: float
    below_h_min: bool

    def __float__(self):
        return self.value


def depth_floor(zeta, b, p: Params) -> DepthFloor:
    """Minimum over nodes of eps*zeta + 1 - beta*b."""
    zeta = np.asarray(zeta, dtype=float)
    b = np.asarray(b, dtype=float)
    if zeta.shape != b.shape:
        raise GridMismatchError(f"zeta shape {zeta.shape} != b shape {b.shape}")
    hmin = float(np.min(1.0 + p.eps * zeta - p.beta * b))
    return DepthFloor(hmin, hmin < p.h_min)

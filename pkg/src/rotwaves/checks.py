"""Quick invariant battery used by ``rotwaves check``."""

from __future__ import annotations

import math

import numpy as np

from .divcurl import flux_identity_check, solve_divcurl, solve_laplace
from .params import Params
from .spectral import Grid
from .strip import build_sigma, sigma_curl
from .swe import ShallowWater, SweState, invariants, swe_rhs
from .waterwaves import WaterWavesState, waterwaves_rhs


def _rest_fixed_point():
    g = Grid(32, 8)
    p = Params(eps=0.1, beta=0.1, mu=0.04, ro=1.0)
    k = waterwaves_rhs(WaterWavesState.rest(g), None, np.cos(g.x), p, g)
    return max(np.abs(k.zeta).max(), np.abs(k.psi).max(), np.abs(k.omega).max()), 1e-14


def _lake_at_rest():
    g = Grid(32, 8)
    p = Params(eps=0.1, beta=0.3, mu=0.04, ro=1.0)
    dz, dv = swe_rhs(SweState.rest(g), None, np.cos(g.x) + np.sin(3 * g.x), p, g)
    return max(np.abs(dz).max(), np.abs(dv).max()), 1e-15


def _cosh_profile():
    g = Grid(32, 24)
    p = Params(eps=0.1, beta=0.0, mu=0.25)
    phi = solve_laplace(np.zeros(g.nx), None, np.cos(2 * g.x), p, g)
    sk = math.sqrt(p.mu) * 2
    exact = np.cos(2 * g.X) * np.cosh(sk * (g.Z + 1)) / math.cosh(sk)
    return np.abs(phi - exact).max(), 1e-10


def _flux_identity():
    g = Grid(32, 16)
    p = Params(eps=0.1, beta=0.1, mu=0.04)
    smap = build_sigma(np.cos(g.x), np.sin(g.x), p, g)
    B = np.stack([np.sin(g.X) * np.cos(g.Z), np.cos(2 * g.X) * g.Z**2, np.cos(g.X) * np.exp(g.Z)])
    sol = solve_divcurl(smap, None, 0.3 * np.sin(g.x), sigma_curl(B, smap), mean_flow=(0.2, 0.1))
    return flux_identity_check(sol), 1e-7


def _inertial_circle():
    g = Grid(16, 4)
    p = Params(eps=0.1, beta=0.0, mu=0.01, ro=1.0)
    period = 2 * math.pi * p.ro / p.eps
    v0 = np.stack([np.full(g.nx, 0.3), np.zeros(g.nx)])
    run = ShallowWater(g, p).run(SweState(np.zeros(g.nx), v0, np.zeros((2, g.nx))),
                                 period, dt=period / 512, every=16)
    radius = [np.hypot(*s.v_bar[:, 0]) for s in run.snapshots]
    return max(abs(r - 0.3) for r in radius), 1e-10


def _mass():
    g = Grid(32, 4)
    p = Params(eps=0.2, beta=0.1, mu=0.01, ro=1.0)
    s0 = SweState(0.3 * np.cos(g.x) + 0.1, np.stack([0.2 * np.sin(g.x), 0.1 * np.cos(2 * g.x)]),
                  np.zeros((2, g.nx)))
    run = ShallowWater(g, p, np.cos(g.x)).run(s0, 2.0, dt=0.02, every=10)
    m = invariants(run).mass
    return float(np.max(np.abs(m - m[0]))), 1e-13


CHECKS = (
    ("rest state is a fixed point of the water-waves system", _rest_fixed_point),
    ("lake at rest is a fixed point of the shallow-water system", _lake_at_rest),
    ("flat-strip Laplace solve matches the cosh profile", _cosh_profile),
    ("surface flux equals -mu d_x(h Vbar)", _flux_identity),
    ("inertial oscillation keeps a constant radius", _inertial_circle),
    ("shallow-water mass is conserved", _mass),
)


def run_checks(out=print):
    ok = True
    for name, fn in CHECKS:
        value, tol = fn()
        passed = bool(value < tol)
        ok &= passed
        out(f"{'PASS' if passed else 'FAIL'}  {name}: {value:.3e} (tol {tol:.0e})")
    return ok

"""Rotating Saint-Venant model, shear correction Q and model comparison."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .forcing import NO_FORCING, PressureForcing
from .params import Params, depth_floor
from .spectral import Grid, perp
from .strip import SigmaMap
from .timestep import fd_time_derivative, rk4_step
from .waterwaves import MonitorTrip, WaterWavesRun


@dataclass(frozen=True, eq=False)
class SweState:
    zeta: np.ndarray
    v_bar: np.ndarray            # (2, nx)
    q: np.ndarray                # (2, nx) shear correction
    t: float = 0.0
    work: float = 0.0            # accumulated pressure work, int_0^t int h V.grad P

    @classmethod
    def rest(cls, grid: Grid):
        return cls(np.zeros(grid.nx), np.zeros((2, grid.nx)), np.zeros((2, grid.nx)))


def depth(zeta, b, p: Params):
    if b is None:
        return 1.0 + p.eps * zeta
    return 1.0 + p.eps * zeta - p.beta * b


def swe_rhs(state: SweState, forcing: PressureForcing, b, p: Params, grid: Grid,
            dealias=True):
    """(d zeta, d V) in vector-invariant form.

    ``V.grad V = grad |V|^2/2 + (curl V) V_perp``, which keeps the
    semi-discrete energy balance exact for the spectral derivative.
    """
    forcing = forcing or NO_FORCING
    eps = p.eps
    v = state.v_bar
    h = depth(state.zeta, b, p)
    press = forcing.value(state.t, grid)
    bern = state.zeta + 0.5 * eps * np.sum(v**2, axis=0) + press
    rot = eps * grid.ddx(v[1]) + eps * p.inv_ro
    dzeta = -grid.ddx(h * v[0])
    dv = -rot * perp(v)
    dv[0] -= grid.ddx(bern)
    if dealias:
        dzeta, dv = grid.dealias(dzeta), grid.dealias(dv)
    return dzeta, dv


def q_rhs(q, v_bar, p: Params, grid: Grid, dealias=True):
    """-eps (V.grad) Q - eps (Q.grad) V - (eps/Ro) Q_perp for y-invariant fields."""
    q = np.asarray(q, dtype=float)
    v = np.asarray(v_bar, dtype=float)
    out = -p.eps * (v[0] * grid.ddx(q) + q[0] * grid.ddx(v)) - p.eps * p.inv_ro * perp(q)
    return grid.dealias(out) if dealias else out


def pressure_work_rate(state: SweState, forcing, b, p: Params, grid: Grid):
    """int h V . grad P (the energy sink due to the applied pressure)."""
    if forcing is None or not forcing.active:
        return 0.0
    h = depth(state.zeta, b, p)
    return float(grid.integrate_x(h * state.v_bar[0] * forcing.gradient(state.t, grid)))


# -- conservation ------------------------------------------------------------

@dataclass(frozen=True)
class ConservationReport:
    t: np.ndarray
    mass: np.ndarray
    energy: np.ndarray
    pv_mass: np.ndarray         # int h q
    enstrophy: np.ndarray       # int h q^2
    work: np.ndarray

    @property
    def forced_energy(self):
        """energy + accumulated pressure work; constant in exact arithmetic."""
        return self.energy + self.work


def potential_vorticity(state: SweState, b, p: Params, grid: Grid):
    return (p.eps * grid.ddx(state.v_bar[1]) + p.eps * p.inv_ro) / depth(state.zeta, b, p)


def swe_energy(state: SweState, b, p: Params, grid: Grid):
    h = depth(state.zeta, b, p)
    return 0.5 * float(grid.integrate_x(state.zeta**2 + h * np.sum(state.v_bar**2, axis=0)))


def conservation(states, b, p: Params, grid: Grid) -> ConservationReport:
    rows = []
    for s in states:
        h = depth(s.zeta, b, p)
        pv = potential_vorticity(s, b, p, grid)
        rows.append((s.t, grid.integrate_x(s.zeta), swe_energy(s, b, p, grid),
                     grid.integrate_x(h * pv), grid.integrate_x(h * pv**2), s.work))
    cols = np.array(rows, dtype=float).T
    return ConservationReport(*cols)


def invariants(run) -> ConservationReport:
    return conservation(run.snapshots, run.b, run.params, run.grid)


# -- stepping ----------------------------------------------------------------

@dataclass
class SweSeries:
    t: list = field(default_factory=list)
    zeta: list = field(default_factory=list)
    v_bar: list = field(default_factory=list)
    q: list = field(default_factory=list)

    def arrays(self, name):
        return np.asarray(getattr(self, name))


@dataclass
class SweRun:
    grid: Grid
    params: Params
    b: np.ndarray
    records: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    series: SweSeries = field(default_factory=SweSeries)
    dt: float = 0.0
    trip: MonitorTrip | None = None

    @property
    def final(self):
        return self.snapshots[-1] if self.snapshots else None


class ShallowWater:
    model_name = "swe"

    def __init__(self, grid: Grid, params: Params, b=None, forcing: PressureForcing = None,
                 dealias=True, evolve_q=True, monitors=True):
        self.grid = grid
        self.params = params
        self.b = np.zeros(grid.nx) if b is None else np.asarray(b, dtype=float)
        self.forcing = forcing or NO_FORCING
        self.dealias = dealias
        self.evolve_q = evolve_q
        self.monitors = monitors

    def _f(self, t, y):
        zeta, v, q, _ = y
        s = SweState(zeta, v, q, t)
        dzeta, dv = swe_rhs(s, self.forcing, self.b, self.params, self.grid, self.dealias)
        dq = (q_rhs(q, v, self.params, self.grid, self.dealias) if self.evolve_q
              else np.zeros_like(q))
        dwork = pressure_work_rate(s, self.forcing, self.b, self.params, self.grid)
        return dzeta, dv, dq, dwork

    def step(self, state: SweState, dt) -> SweState:
        y = (state.zeta, state.v_bar, state.q, state.work)
        zeta, v, q, work = rk4_step(self._f, state.t, y, dt)
        new = SweState(zeta, v, q, state.t + dt, float(work))
        floor = depth_floor(zeta, self.b, self.params)
        if self.monitors and floor.below_h_min:
            raise MonitorTrip("depth", floor.value, state)
        return new

    def cfl_dt(self, state: SweState, cfl=0.5):
        vmax = float(np.max(np.abs(state.v_bar)))
        return cfl * self.grid.dx / max(1.0, self.params.eps * vmax)

    def run(self, state: SweState, t_end, dt=None, every=1, keep_fields=True,
            raise_on_trip=False) -> SweRun:
        if dt is None:
            dt = self.cfl_dt(state)
        nsteps = max(1, int(math.ceil((t_end - state.t) / dt - 1e-9)))
        dt = (t_end - state.t) / nsteps
        run = SweRun(self.grid, self.params, self.b, dt=dt)
        self._record(run, state, True)
        for n in range(1, nsteps + 1):
            try:
                state = self.step(state, dt)
            except MonitorTrip as trip:
                run.trip = trip
                run.snapshots.append(trip.snapshot)
                if raise_on_trip:
                    raise
                break
            self._record(run, state, keep_fields and n % every == 0 or n == nsteps)
        return run

    def _record(self, run: SweRun, s: SweState, keep):
        g, p = self.grid, self.params
        run.series.t.append(s.t)
        run.series.zeta.append(s.zeta)
        run.series.v_bar.append(s.v_bar)
        run.series.q.append(s.q)
        run.records.append({
            "t": s.t,
            "zeta_l2": math.sqrt(float(g.integrate_x(s.zeta**2))),
            "zeta_max": float(np.max(np.abs(s.zeta))),
            "min_depth": depth_floor(s.zeta, self.b, p).value,
            "min_rt": float("nan"),
            "mass": float(g.integrate_x(s.zeta)),
            "energy": swe_energy(s, self.b, p, g),
            "vbar_max": float(np.max(np.abs(s.v_bar))),
            "div_omega": float("nan"),
        })
        if keep:
            run.snapshots.append(s)


def step(state: SweState, dt, forcing=None, b=None, p: Params = None, grid: Grid = None):
    return ShallowWater(grid, p, b, forcing).step(state, dt)


# -- shear correction and reconstruction ------------------------------------

def _double_integral(omega, smap: SigmaMap):
    """(h int_z^0 omega_h_perp, h int_{-1}^0 int_z^0 omega_h_perp) on the strip."""
    g = smap.grid
    om = np.asarray(omega, dtype=float)
    wp = np.stack([-om[1], om[0]])
    h = smap.h[:, None]
    inner = h * (wp @ g.int_to_surface.T)
    return inner, g.integrate_z(inner)


def q_from_omega(omega, smap: SigmaMap):
    """Q = (1/h) int int omega_h_perp in physical variables (two Jacobians of h)."""
    return _double_integral(omega, smap)[1]


def wkb_reconstruct(v_bar, omega, smap: SigmaMap, q=None):
    """Truncated expansion of the strip velocity about the columnar flow.

    Returns (V, w): ``V = Vbar + sqrt(mu)(h int_z^0 omega_perp - Q)`` and
    ``w = -mu d_x((1 + z) h Vbar_x)``, the strip form of ``-mu div((1 + Z - beta b) Vbar)``.
    """
    g, p = smap.grid, smap.params
    v_bar = np.asarray(v_bar, dtype=float)
    inner, q_omega = _double_integral(omega, smap)
    q = q_omega if q is None else np.asarray(q, dtype=float)
    V = v_bar[:, :, None] + p.sqrt_mu * (inner - q[:, :, None])
    w = -p.mu * g.ddx((1.0 + g.Z) * (smap.h * v_bar[0])[:, None], axis=-2)
    return V, w


# -- comparison --------------------------------------------------------------

@dataclass(frozen=True)
class ModelComparison:
    t: np.ndarray
    zeta: np.ndarray
    v_bar: np.ndarray
    q: np.ndarray            # sqrt(mu) |Q_ww - Q_swe|
    surface: np.ndarray      # |U_par - (Vbar - sqrt(mu) Q)| with SWE quantities

    @property
    def combined(self):
        return np.maximum(np.maximum(self.zeta, self.v_bar), self.q)

    @property
    def max_error(self):
        return float(np.max(self.combined))


def initial_swe_state(ww_run: WaterWavesRun) -> SweState:
    s = ww_run.series
    return SweState(np.array(s.zeta[0]), np.array(s.v_bar[0]), np.array(s.q[0]), s.t[0])


def compare_models(ww_run: WaterWavesRun, swe_run: SweRun, p: Params = None) -> ModelComparison:
    p = p or ww_run.params
    a, b = ww_run.series, swe_run.series
    if ww_run.grid != swe_run.grid or ww_run.params != swe_run.params:
        raise ValueError("runs do not share grid and parameters")
    if len(a.t) != len(b.t) or not np.allclose(a.t, b.t, rtol=0, atol=1e-12):
        raise ValueError("runs do not share output times")
    sm = p.sqrt_mu
    sup = lambda x: np.max(np.abs(x).reshape(len(a.t), -1), axis=1)
    qa, qb = a.arrays("q"), b.arrays("q")
    surf = a.arrays("u_par") - (b.arrays("v_bar") - sm * qb)
    return ModelComparison(
        t=np.asarray(a.t),
        zeta=sup(a.arrays("zeta") - b.arrays("zeta")),
        v_bar=sup(a.arrays("v_bar") - b.arrays("v_bar")),
        q=sm * sup(qa - qb),
        surface=sup(surf),
    )


def q_equation_residual(ww_run: WaterWavesRun):
    """Per-time max residual of the Q equation on Q(t) = q_from_omega(omega(t))."""
    s = ww_run.series
    if len(s.t) < 5:
        raise ValueError("need at least five stored steps")
    g, p = ww_run.grid, ww_run.params
    q = s.arrays("q")
    v = s.arrays("v_bar")
    dq = fd_time_derivative(q, ww_run.dt)
    res = np.stack([dq[i] - q_rhs(q[i + 2], v[i + 2], p, g, dealias=False)
                    for i in range(len(dq))])
    return np.max(np.abs(res).reshape(len(res), -1), axis=1)


def q_residual_scaling(ww_run: WaterWavesRun, p: Params = None):
    """Sup over time of the Q-equation residual."""
    return float(np.max(q_equation_residual(ww_run)))


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    residual: float


def fit_slope(xs, ys) -> SlopeFit:
    """Least-squares slope of log y against log x.

    ``xs`` must hold at least three strictly decreasing positive values.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size < 3:
        raise ValueError("a slope fit needs at least three points")
    if np.any(np.diff(xs) >= 0):
        raise ValueError("sweep values must be strictly decreasing (no duplicates)")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ValueError("slope fit needs positive values")
    lx, ly = np.log(xs), np.log(ys)
    (slope, intercept), res, *_ = np.polyfit(lx, ly, 1, full=True)
    return SlopeFit(float(slope), float(intercept), float(res[0]) if len(res) else 0.0)

"""Time stepping of the straightened water-waves system with rotation.

Unknowns are the surface elevation ``zeta``, the zero-mean potential trace
``psi`` and the strip vorticity ``omega``. On the torus the tangential surface
velocity also carries a uniform part that no potential can represent; it is
kept as the two-vector ``mean_flow`` and evolved alongside.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .divcurl import DivCurlSolution, leray_project, solve_divcurl
from .forcing import NO_FORCING, PressureForcing
from .params import DepthError, Params, depth_floor
from .spectral import Grid, bessel_potential, perp
from .strip import SigmaMap, build_sigma, sigma_div, traces
from .timestep import fd_time_derivative, rk4_step


class MonitorTrip(RuntimeError):
    """A runtime monitor fired; ``snapshot`` is the last accepted state."""

    def __init__(self, kind, value, snapshot, message=""):
        self.kind = kind
        self.value = value
        self.snapshot = snapshot
        super().__init__(message or f"{kind} monitor tripped at t={snapshot.t:.6g} (value {value:.6g})")


@dataclass(frozen=True, eq=False)
class WaterWavesState:
    zeta: np.ndarray
    psi: np.ndarray
    omega: np.ndarray
    t: float = 0.0
    mean_flow: np.ndarray = field(default_factory=lambda: np.zeros(2))

    @classmethod
    def rest(cls, grid: Grid):
        return cls(np.zeros(grid.nx), np.zeros(grid.nx), np.zeros((3,) + grid.shape))

    def as_tuple(self):
        return (self.zeta, self.psi, self.omega, np.asarray(self.mean_flow, dtype=float))


class Tendency(NamedTuple):
    zeta: np.ndarray
    psi: np.ndarray
    omega: np.ndarray
    mean_flow: np.ndarray
    solution: DivCurlSolution


def waterwaves_rhs(state: WaterWavesState, forcing: PressureForcing, b, p: Params, grid: Grid,
           method="auto", dealias=True) -> Tendency:
    """Time derivatives of (zeta, psi, omega, mean_flow) at ``state``."""
    forcing = forcing or NO_FORCING
    smap = build_sigma(state.zeta, b, p, grid)
    sol = solve_divcurl(smap, None, state.psi, state.omega, mean_flow=state.mean_flow,
                        method=method, check_div=False)
    eps, mu, sm = p.eps, p.mu, p.sqrt_mu
    U, om = sol.u_mu, state.omega
    tr = sol.traces
    clean = grid.dealias if dealias else (lambda f, axis=-1: f)

    dzeta = clean(tr.surface_normal / mu)

    v_top = tr.surface[:2] / sm
    w_top = tr.surface[2]
    upar = tr.tangential
    omega_n = traces(om, smap).surface_normal
    lamb = (omega_n + p.inv_ro) * perp(v_top)
    press = forcing.value(state.t, grid)
    dpsi = (-state.zeta - 0.5 * eps * np.sum(upar**2, axis=0)
            + 0.5 * eps / mu * (1 + eps**2 * mu * smap.zeta_x**2) * w_top**2
            - eps * grid.antiderivative(lamb[0]) - press)
    dpsi = clean(dpsi - dpsi.mean())
    dmean = -eps * lamb.mean(axis=-1)

    if np.any(om) or p.inv_ro:
        domega = _vorticity_rhs(om, U, dzeta, smap, p)
        domega = clean(domega, axis=-2)
    else:
        domega = np.zeros_like(om)
    return Tendency(dzeta, dpsi, domega, dmean, sol)


def _vorticity_rhs(om, U, dzeta, smap: SigmaMap, p: Params):
    g = smap.grid
    eps, mu, sm = p.eps, p.mu, p.sqrt_mu
    h = smap.h[:, None]
    om_z = g.cheb_d_dz(om)
    U_z = g.cheb_d_dz(U)
    om_x = smap.dx_s(om, om_z)
    U_x = smap.dx_s(U, U_z)
    advect = U[0] * sm * om_x + U[2] * om_z / h
    stretch = om[0] * sm * U_x + om[2] * U_z / h
    dt_sigma = (g.Z + 1.0) * eps * dzeta[:, None]
    out = dt_sigma / h * om_z + eps / mu * (stretch - advect)
    if p.inv_ro:
        out = out + eps * p.inv_ro / mu * U_z / h
    return out


def rayleigh_taylor(w_prev, w_now, dt, v_top, p: Params, grid: Grid):
    """1 + eps (d_t + eps V.grad) w at the surface; d_t by a backward difference."""
    if w_prev is None or dt <= 0:
        raise ValueError("Rayleigh-Taylor coefficient needs two consecutive surface traces")
    return 1.0 + p.eps * ((w_now - w_prev) / dt + p.eps * v_top[0] * grid.ddx(w_now))


def cfl_dt(state: WaterWavesState, sol: DivCurlSolution | None, grid: Grid, p: Params,
           cfl=0.5):
    vmax = 0.0
    if sol is not None:
        vmax = float(np.max(np.abs(sol.traces.surface[:2]))) / p.sqrt_mu
    return cfl * grid.dx / max(1.0, p.eps * vmax)


def strip_norm(f, grid: Grid):
    """sqrt of the strip integral of |f|^2 (components summed)."""
    f = np.asarray(f)
    return math.sqrt(float(grid.integrate_x(grid.integrate_z(f**2).reshape(-1, grid.nx).sum(axis=0))))


def sobolev_diagnostics(state: WaterWavesState, grid: Grid, p: Params, b=None,
                        solution: DivCurlSolution | None = None):
    """|zeta|_{H^s} for s = 0..3 and strip L^2 norms of omega and grad^mu U."""
    out = {}
    for s in range(4):
        ls = bessel_potential(state.zeta, grid, s)
        out[f"zeta_h{s}"] = math.sqrt(float(grid.integrate_x(ls**2)))
    out["omega_l2"] = strip_norm(state.omega, grid)
    if solution is None:
        solution = solve_divcurl(state.zeta, b, state.psi, state.omega, p, grid,
                                 mean_flow=state.mean_flow, check_div=False)
    U = solution.u_mu
    grad = np.concatenate([p.sqrt_mu * grid.ddx(U, axis=-2), grid.cheb_d_dz(U)])
    out["grad_u_l2"] = strip_norm(grad, grid)
    return out


def energy(state: WaterWavesState, sol: DivCurlSolution, grid: Grid, p: Params):
    """(1/2) int zeta^2 + (1/(2 mu)) int_strip h |U^mu|^2."""
    h = sol.smap.h
    kin = grid.integrate_x(h * grid.integrate_z(np.sum(sol.u_mu**2, axis=0)))
    return 0.5 * grid.integrate_x(state.zeta**2) + 0.5 / p.mu * kin


@dataclass
class TraceSeries:
    """Per-step surface and bottom data needed by the time-derivative diagnostics."""

    t: list = field(default_factory=list)
    bottom_normal: list = field(default_factory=list)   # omega_b . N_b
    bottom_v: list = field(default_factory=list)        # V_b, x-component
    surface_normal: list = field(default_factory=list)  # omega(z=0) . N
    surface_v: list = field(default_factory=list)
    zeta: list = field(default_factory=list)
    v_bar: list = field(default_factory=list)
    q: list = field(default_factory=list)
    u_par: list = field(default_factory=list)

    def arrays(self, name):
        return np.asarray(getattr(self, name))


RECORD_COLUMNS = ("t", "zeta_l2", "zeta_max", "min_depth", "min_rt", "mass", "energy",
                  "vbar_max", "div_omega")


@dataclass
class WaterWavesRun:
    grid: Grid
    params: Params
    b: np.ndarray
    records: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    series: TraceSeries = field(default_factory=TraceSeries)
    dt: float = 0.0
    initial_divergence: float = 0.0
    trip: MonitorTrip | None = None

    @property
    def final(self):
        return self.snapshots[-1] if self.snapshots else None


class WaterWaves:
    """Stepper with depth and Rayleigh-Taylor monitors.

    The tendency of each accepted state is cached: it is the first RK stage
    of the next step and also feeds the monitors and stored traces.
    """

    model_name = "waterwaves"

    def __init__(self, grid: Grid, params: Params, b=None, forcing: PressureForcing = None,
                 method="auto", dealias=True, monitors=True):
        self.grid = grid
        self.params = params
        self.b = np.zeros(grid.nx) if b is None else np.asarray(b, dtype=float)
        self.forcing = forcing or NO_FORCING
        self.method = method
        self.dealias = dealias
        self.monitors = monitors
        self._cache = (None, None)
        self._w_prev = None

    # -- state handling -----------------------------------------------------
    def prepare(self, state: WaterWavesState):
        """Leray-project the initial vorticity; returns (state, violation before)."""
        if not np.any(state.omega):
            return state, 0.0
        smap = build_sigma(state.zeta, self.b, self.params, self.grid)
        omega, viol = leray_project(state.omega, smap, method=self.method)
        return replace(state, omega=omega), viol

    def tendency(self, state: WaterWavesState) -> Tendency:
        cached_state, cached = self._cache
        if cached_state is state:
            return cached
        try:
            out = waterwaves_rhs(state, self.forcing, self.b, self.params, self.grid,
                         method=self.method, dealias=self.dealias)
        except DepthError as exc:
            raise MonitorTrip("depth", exc.value, state, str(exc)) from exc
        self._cache = (state, out)
        return out

    def _f(self, t, y):
        zeta, psi, omega, mean = y
        k = waterwaves_rhs(WaterWavesState(zeta, psi, omega, t, mean), self.forcing, self.b,
                   self.params, self.grid, method=self.method, dealias=self.dealias)
        return (k.zeta, k.psi, k.omega, k.mean_flow)

    def step(self, state: WaterWavesState, dt) -> WaterWavesState:
        k1 = self.tendency(state)
        first = (k1.zeta, k1.psi, k1.omega, k1.mean_flow)
        try:
            zeta, psi, omega, mean = rk4_step(self._f, state.t, state.as_tuple(), dt, first)
        except DepthError as exc:
            raise MonitorTrip("depth", exc.value, state, str(exc)) from exc
        new = WaterWavesState(zeta, psi - psi.mean(), omega, state.t + dt, mean)
        floor = depth_floor(new.zeta, self.b, self.params)
        if self.monitors and floor.below_h_min:
            raise MonitorTrip("depth", floor.value, state)
        return new

    # -- driver ---------------------------------------------------------------
    def run(self, state: WaterWavesState, t_end, dt=None, every=1, keep_fields=True,
            raise_on_trip=False, prepare=True) -> WaterWavesRun:
        """Integrate to ``t_end``; ``dt=None`` picks the CFL step once from the initial state."""
        g, p = self.grid, self.params
        viol = 0.0
        if prepare:
            state, viol = self.prepare(state)
        k = self.tendency(state)
        if dt is None:
            dt = cfl_dt(state, k.solution, g, p)
        nsteps = max(1, int(math.ceil((t_end - state.t) / dt - 1e-9)))
        dt = (t_end - state.t) / nsteps
        run = WaterWavesRun(g, p, self.b, dt=dt, initial_divergence=viol)
        self._w_prev = None
        self._record(run, state, k, dt, True)
        for n in range(1, nsteps + 1):
            try:
                state = self.step(state, dt)
                k = self.tendency(state)
                self._record(run, state, k, dt, keep_fields and n % every == 0 or n == nsteps,
                             check=self.monitors)
            except MonitorTrip as trip:
                run.trip = trip
                run.snapshots.append(trip.snapshot)
                if raise_on_trip:
                    raise
                break
        return run

    def _record(self, run, state, k: Tendency, dt, keep, check=False):
        g, p = self.grid, self.params
        sol = k.solution
        tr = sol.traces
        w_top = tr.surface[2]
        v_top = tr.surface[:2] / p.sqrt_mu
        rt = float("nan")
        if self._w_prev is not None:
            a = rayleigh_taylor(self._w_prev, w_top, dt, v_top, p, g)
            rt = float(a.min())
        self._w_prev = w_top
        floor = depth_floor(state.zeta, self.b, p).value
        from .swe import q_from_omega  # local import: swe depends on this module's types

        om_tr = traces(state.omega, sol.smap)
        s = run.series
        s.t.append(state.t)
        s.bottom_normal.append(om_tr.bottom_normal)
        s.bottom_v.append(tr.bottom[0] / p.sqrt_mu)
        s.surface_normal.append(om_tr.surface_normal)
        s.surface_v.append(v_top[0])
        s.zeta.append(state.zeta.copy())
        s.v_bar.append(sol.v_bar)
        s.q.append(q_from_omega(state.omega, sol.smap))
        s.u_par.append(tr.tangential)
        div = float(np.max(np.abs(sigma_div(state.omega, sol.smap)))) if np.any(state.omega) else 0.0
        run.records.append({
            "t": state.t,
            "zeta_l2": math.sqrt(float(g.integrate_x(state.zeta**2))),
            "zeta_max": float(np.max(np.abs(state.zeta))),
            "min_depth": floor,
            "min_rt": rt,
            "mass": float(g.integrate_x(state.zeta)),
            "energy": float(energy(state, sol, g, p)),
            "vbar_max": float(np.max(np.abs(sol.v_bar))),
            "div_omega": div,
        })
        if keep:
            run.snapshots.append(state)
        if check and rt == rt and rt < p.a_min:
            raise MonitorTrip("rayleigh_taylor", rt, state)


def trace_transport_residual(run: WaterWavesRun, skip=0):
    """Max residuals of the bottom and surface transport laws for omega . N.

    d_t by a fourth-order centred difference over stored steps, so the result
    converges like dt^4 plus the spatial error floor.
    """
    s = run.series
    if len(s.t) < 5:
        raise ValueError("need at least five stored steps")
    g, p = run.grid, run.params
    dt = run.dt
    out = {}
    for name, qn, vn in (("bottom", "bottom_normal", "bottom_v"),
                         ("surface", "surface_normal", "surface_v")):
        q = s.arrays(qn)
        v = s.arrays(vn)
        dq = fd_time_derivative(q, dt)
        flux = g.ddx((q[2:-2] + p.inv_ro) * v[2:-2])
        res = dq + p.eps * flux
        out[name] = float(np.max(np.abs(res[skip:])))
    return out

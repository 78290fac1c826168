"""Turn a :class:`ScenarioConfig` into runs, comparisons and sweep metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .config import ScenarioConfig, series
from .divcurl import solve_divcurl
from .spectral import Grid
from .swe import (ModelComparison, ShallowWater, SweRun, SweState, compare_models,
                  fit_slope, initial_swe_state, q_from_omega, q_residual_scaling)
from .waterwaves import WaterWaves, WaterWavesRun, WaterWavesState


@dataclass
class ScenarioResult:
    config: ScenarioConfig
    waterwaves: WaterWavesRun | None = None
    swe: SweRun | None = None
    comparison: ModelComparison | None = None

    @property
    def trips(self):
        return [r.trip for r in (self.waterwaves, self.swe) if r is not None and r.trip]


def initial_state(cfg: ScenarioConfig) -> WaterWavesState:
    g = cfg.grid
    ini = cfg.initial
    zeta = series(g, ini.zeta_cos, ini.zeta_sin)
    psi = series(g, ini.psi_cos, ini.psi_sin)
    if ini.random_amplitude:
        rng = np.random.default_rng(cfg.seed)
        for k in range(1, ini.random_modes + 1):
            a = ini.random_amplitude / k**2 * rng.standard_normal(4)
            zeta += a[0] * np.cos(k * g.x) + a[1] * np.sin(k * g.x)
            psi += a[2] * np.cos(k * g.x) + a[3] * np.sin(k * g.x)
    omega = np.zeros((3,) + g.shape)
    profile = series(g, ini.omega_cos, ini.omega_sin)
    omega[1] = profile[:, None] * (1.0 + g.Z) + ini.shear
    return WaterWavesState(zeta, psi - psi.mean(), omega, 0.0, np.array(ini.mean_flow, dtype=float))


def swe_state_from(state: WaterWavesState, cfg: ScenarioConfig) -> SweState:
    """SWE data consistent with a water-waves state: (zeta, Vbar, Q[omega])."""
    sol = solve_divcurl(state.zeta, cfg.bathymetry(), state.psi, state.omega, cfg.params,
                        cfg.grid, mean_flow=state.mean_flow, check_div=False)
    return SweState(state.zeta.copy(), sol.v_bar, q_from_omega(state.omega, sol.smap), state.t)


def _every(cfg, dt):
    if cfg.output_every > 0:
        return cfg.output_every
    return max(1, int(round(cfg.t_end / dt)))


def run_scenario(cfg: ScenarioConfig) -> ScenarioResult:
    b = cfg.bathymetry()
    out = ScenarioResult(cfg)
    state = initial_state(cfg)
    ww = WaterWaves(cfg.grid, cfg.params, b, cfg.forcing)
    if cfg.model in ("waterwaves", "both"):
        state, _ = ww.prepare(state)
        dt = cfg.dt
        if dt is None:
            from .waterwaves import cfl_dt
            dt = cfl_dt(state, ww.tendency(state).solution, cfg.grid, cfg.params)
        out.waterwaves = ww.run(state, cfg.t_end, dt=dt, every=_every(cfg, dt), prepare=False)
    if cfg.model in ("swe", "both"):
        sw = ShallowWater(cfg.grid, cfg.params, b, cfg.forcing)
        if out.waterwaves is not None:
            s0 = initial_swe_state(out.waterwaves)
            dt = out.waterwaves.dt
        else:
            s0 = swe_state_from(ww.prepare(state)[0], cfg)
            dt = cfg.dt or sw.cfl_dt(s0)
        out.swe = sw.run(s0, cfg.t_end, dt=dt, every=_every(cfg, dt))
    if out.waterwaves is not None and out.swe is not None and not out.trips:
        out.comparison = compare_models(out.waterwaves, out.swe)
    return out


# -- linear frequencies ------------------------------------------------------

def _frequency(step, basis, dt):
    """Phase speed per unit time of the 2x2 one-step propagator on ``basis``."""
    cols = [step(e) for e in basis]
    lam = np.linalg.eigvals(np.array(cols).T)
    return float(np.max(np.abs(np.angle(lam)))) / dt


def waterwaves_frequency(grid: Grid, p, k, dt):
    """Measured linear frequency of mode ``k`` (flat bottom, no vorticity)."""
    model = WaterWaves(grid, p, monitors=False)
    c = np.cos(k * grid.x)
    proj = c / np.dot(c, c)
    zero = np.zeros((3,) + grid.shape)

    def step(e):
        s = model.step(WaterWavesState(e[0] * c, e[1] * c, zero), dt)
        return [s.zeta @ proj, s.psi @ proj]
    return _frequency(step, [(1.0, 0.0), (0.0, 1.0)], dt)


def swe_frequency(grid: Grid, p, k, dt):
    model = ShallowWater(grid, p, evolve_q=False, monitors=False)
    c, s_ = np.cos(k * grid.x), np.sin(k * grid.x)
    pc, ps = c / np.dot(c, c), s_ / np.dot(s_, s_)
    zero = np.zeros(grid.nx)

    def step(e):
        s = model.step(SweState(e[0] * c, np.stack([e[1] * s_, zero]), np.zeros((2, grid.nx))), dt)
        return [s.zeta @ pc, s.v_bar[0] @ ps]
    return _frequency(step, [(1.0, 0.0), (0.0, 1.0)], dt)


def exact_waterwaves_frequency(k, mu):
    sm = math.sqrt(mu)
    return math.sqrt(k * math.tanh(sm * k) / sm)


# -- sweeps ------------------------------------------------------------------

def _with_value(cfg: ScenarioConfig, parameter, value):
    if parameter == "dt":
        return replace(cfg, dt=value)
    return replace(cfg, params=cfg.params.replace(**{parameter: value}))


def inertial_error(cfg: ScenarioConfig):
    """Max |Vbar(T) - Vbar(0)| after one inertial period from uniform flow."""
    p = cfg.params
    if not p.inv_ro:
        raise ValueError("inertial oscillation needs a finite Rossby number")
    period = 2 * math.pi * p.ro / p.eps
    v0 = np.array(cfg.initial.mean_flow, dtype=float)[:, None] * np.ones(cfg.grid.nx)
    s0 = SweState(np.zeros(cfg.grid.nx), v0, np.zeros((2, cfg.grid.nx)))
    model = ShallowWater(cfg.grid, p, evolve_q=False)
    dt = cfg.dt or period / 256
    run = model.run(s0, period, dt=dt, keep_fields=False)
    return float(np.max(np.abs(run.final.v_bar - v0)))


def sweep_metric(cfg: ScenarioConfig, value):
    spec = cfg.sweep
    c = _with_value(cfg, spec.parameter, value)
    if spec.metric == "model_error":
        res = run_scenario(replace(c, model="both"))
        if res.trips:
            raise RuntimeError(f"monitor tripped during sweep point {value}: {res.trips[0]}")
        return res.comparison.max_error
    if spec.metric == "q_residual":
        res = run_scenario(replace(c, model="waterwaves"))
        if res.trips:
            raise RuntimeError(f"monitor tripped during sweep point {value}: {res.trips[0]}")
        return q_residual_scaling(res.waterwaves)
    if spec.metric == "inertial_error":
        return inertial_error(c)
    if spec.metric == "dispersion_error":
        dt = c.dt or 0.01
        k = spec.mode
        ww = waterwaves_frequency(c.grid, c.params, k, dt)
        sw = swe_frequency(c.grid, c.params, k, dt)
        return abs(ww - sw) / sw
    raise ValueError(f"unknown metric {spec.metric!r}")


def _sweep_worker(args):
    cfg, value = args
    return sweep_metric(cfg, value)


def run_sweep(cfg: ScenarioConfig, threads=1):
    """Evaluate the sweep metric at every value; returns (values, metrics, fit)."""
    if cfg.sweep is None:
        raise ValueError("config has no [sweep] section")
    values = list(cfg.sweep.values)
    jobs = [(cfg, v) for v in values]
    if threads > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=threads) as pool:
            metrics = list(pool.map(_sweep_worker, jobs))
    else:
        metrics = [_sweep_worker(j) for j in jobs]
    return values, metrics, fit_slope(values, metrics)

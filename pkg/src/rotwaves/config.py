"""Scenario files: INI sections with ``key = value`` entries.

Example::

    [scenario]
    model = both
    preset = sheared_wave

    [params]
    eps = 0.1
    beta = 0.05
    mu = 0.01
    ro = 1.0

    [grid]
    nx = 64
    nz = 16

    [time]
    t_end = 1.0
    dt = 0.025
    output_every = 10

Coefficient lists (``zeta_cos = 0.5, 0.0, 0.1``) give the amplitude of
mode k = 1, 2, ... and must stay inside the dealiased band of the grid.
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field

import numpy as np

from .forcing import PressureForcing
from .params import Params, RegimeError
from .spectral import Grid

MODELS = ("waterwaves", "swe", "both")
METRICS = ("model_error", "q_residual", "inertial_error", "dispersion_error")

PRESETS = {
    "rest": {},
    "inertial": {"mean_flow": "0.3, -0.2"},
    "standing_wave": {"zeta_cos": "0.5"},
    "sheared_wave": {"zeta_cos": "0.5, 0.0", "zeta_sin": "0.0, 0.2", "psi_sin": "0.3",
                     "omega_cos": "1.0"},
    "uniform_shear": {"shear": "1.0"},
}

_SPEC_KEYS = ("zeta_cos", "zeta_sin", "psi_cos", "psi_sin", "omega_cos", "omega_sin",
              "b_cos", "b_sin")


class ConfigError(ValueError):
    def __init__(self, message, section=None, key=None, line=None):
        where = ""
        if section:
            where = f"[{section}]" + (f" {key}" if key else "")
        if line:
            where = f"line {line}: " + where
        super().__init__(f"{where}: {message}" if where else message)
        self.section, self.key, self.line = section, key, line


@dataclass(frozen=True)
class InitialData:
    zeta_cos: tuple = ()
    zeta_sin: tuple = ()
    psi_cos: tuple = ()
    psi_sin: tuple = ()
    omega_cos: tuple = ()      # y-vorticity a_k cos(kx) (1 + z)
    omega_sin: tuple = ()
    shear: float = 0.0         # uniform y-vorticity
    mean_flow: tuple = (0.0, 0.0)
    random_amplitude: float = 0.0
    random_modes: int = 4


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    values: tuple
    metric: str = "model_error"
    mode: int = 1


@dataclass(frozen=True)
class ScenarioConfig:
    model: str
    params: Params
    grid: Grid
    initial: InitialData = field(default_factory=InitialData)
    b_cos: tuple = ()
    b_sin: tuple = ()
    forcing: PressureForcing = field(default_factory=PressureForcing)
    t_end: float = 1.0
    dt: float | None = None
    output_every: int = 0
    seed: int = 0
    preset: str = ""
    sweep: SweepSpec | None = None
    source: dict = field(default_factory=dict, compare=False)

    def bathymetry(self):
        return series(self.grid, self.b_cos, self.b_sin)

    def echo(self):
        """Flattened ``section.key -> value`` view of the parsed file."""
        return dict(self.source)


def series(grid: Grid, cos=(), sin=()):
    x = grid.x
    out = np.zeros(grid.nx)
    for k, a in enumerate(cos, start=1):
        out += a * np.cos(k * x)
    for k, a in enumerate(sin, start=1):
        out += a * np.sin(k * x)
    return out


def _locate(text, section, key):
    current = None
    for n, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        m = re.match(r"\[(.+)\]", s)
        if m:
            current = m.group(1).strip()
        elif current == section and key and re.match(rf"{re.escape(key)}\s*[=:]", s):
            return n
    return None


class _Reader:
    def __init__(self, cp, text):
        self.cp, self.text = cp, text
        self.used = set()

    def err(self, msg, section, key=None):
        return ConfigError(msg, section, key, _locate(self.text, section, key))

    def raw(self, section, key, default=None):
        if self.cp.has_option(section, key):
            self.used.add((section, key))
            return self.cp.get(section, key).strip()
        return default

    def num(self, section, key, default=None, kind=float):
        v = self.raw(section, key)
        if v is None:
            if default is None:
                raise self.err("missing required value", section, key)
            return default
        try:
            if kind is int:
                return int(v)
            return math.inf if v.lower() in ("inf", "infinity", "none") else float(v)
        except ValueError:
            raise self.err(f"expected a {kind.__name__}, got {v!r}", section, key) from None

    def floats(self, section, key, default=""):
        v = self.raw(section, key, default)
        if not v:
            return ()
        try:
            return tuple(float(t) for t in re.split(r"[,\s]+", v) if t)
        except ValueError:
            raise self.err(f"expected a comma-separated list of numbers, got {v!r}",
                           section, key) from None


def load_config(path=None, text=None, seed=None) -> ScenarioConfig:
    if text is None:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text, source=str(path or "<string>"))
    except configparser.Error as exc:
        raise ConfigError(str(exc).replace("\n", " ")) from None
    r = _Reader(cp, text)

    model = r.raw("scenario", "model", "waterwaves")
    if model not in MODELS:
        raise r.err(f"model must be one of {MODELS}, got {model!r}", "scenario", "model")
    preset = r.raw("scenario", "preset", "")
    if preset and preset not in PRESETS:
        raise r.err(f"unknown preset {preset!r}; known: {sorted(PRESETS)}", "scenario", "preset")
    for k, v in PRESETS.get(preset, {}).items():
        if not cp.has_option("initial", k):
            if not cp.has_section("initial"):
                cp.add_section("initial")
            cp.set("initial", k, v)

    try:
        params = Params(
            eps=r.num("params", "eps"), beta=r.num("params", "beta", 0.0),
            mu=r.num("params", "mu"), ro=r.num("params", "ro", math.inf),
            mu_max=r.num("params", "mu_max", 1.0), h_min=r.num("params", "h_min", 0.05),
            a_min=r.num("params", "a_min", 0.1))
    except RegimeError as exc:
        raise ConfigError(str(exc), "params") from None
    try:
        grid = Grid(r.num("grid", "nx", 64, int), r.num("grid", "nz", 16, int),
                    r.num("grid", "period", 2 * math.pi))
    except ValueError as exc:
        raise ConfigError(str(exc), "grid") from None

    kmax = grid.nx // 3
    lists = {}
    for key in _SPEC_KEYS:
        section = "bathymetry" if key.startswith("b_") else "initial"
        vals = r.floats(section, key)
        if len(vals) > kmax:
            raise r.err(f"{len(vals)} modes exceed the dealiased band (k <= {kmax})", section, key)
        lists[key] = vals
    mean_flow = r.floats("initial", "mean_flow", "0, 0")
    if len(mean_flow) != 2:
        raise r.err("mean_flow needs two components", "initial", "mean_flow")
    initial = InitialData(
        zeta_cos=lists["zeta_cos"], zeta_sin=lists["zeta_sin"],
        psi_cos=lists["psi_cos"], psi_sin=lists["psi_sin"],
        omega_cos=lists["omega_cos"], omega_sin=lists["omega_sin"],
        shear=r.num("initial", "shear", 0.0), mean_flow=mean_flow,
        random_amplitude=r.num("initial", "random_amplitude", 0.0),
        random_modes=r.num("initial", "random_modes", 4, int))
    if initial.random_modes > kmax:
        raise r.err(f"random_modes must be <= {kmax}", "initial", "random_modes")

    kind = r.raw("forcing", "kind", "none")
    try:
        forcing = PressureForcing(
            kind=kind, p0=r.num("forcing", "p0", 0.0), c=r.num("forcing", "c", 0.0),
            ell=r.num("forcing", "ell", 1.0), x0=r.num("forcing", "x0", grid.period / 2),
            width=r.num("forcing", "width", grid.period / 2), ramp=r.num("forcing", "ramp", 0.0))
    except ValueError as exc:
        raise r.err(str(exc), "forcing", "kind") from None
    if kind == "smooth_step" and forcing.ell < 4 * grid.dx:
        raise r.err(f"ell must be >= 4 dx = {4 * grid.dx:.4g} to stay band-limited",
                    "forcing", "ell")

    dt_raw = r.raw("time", "dt", "auto")
    dt = None if dt_raw.lower() == "auto" else r.num("time", "dt")
    if dt is not None and not dt > 0:
        raise r.err("dt must be positive", "time", "dt")
    t_end = r.num("time", "t_end", 1.0)
    if not t_end > 0:
        raise r.err("t_end must be positive", "time", "t_end")

    sweep = None
    if cp.has_section("sweep"):
        values = r.floats("sweep", "values")
        parameter = r.raw("sweep", "parameter")
        if parameter is None:
            raise r.err("missing required value", "sweep", "parameter")
        if parameter not in ("eps", "beta", "mu", "ro", "dt"):
            raise r.err(f"cannot sweep {parameter!r}", "sweep", "parameter")
        metric = r.raw("sweep", "metric", "model_error")
        if metric not in METRICS:
            raise r.err(f"metric must be one of {METRICS}", "sweep", "metric")
        if len(values) < 3:
            raise r.err("a slope fit needs at least three values", "sweep", "values")
        if any(b >= a for a, b in zip(values, values[1:])):
            raise r.err("values must be strictly decreasing without duplicates", "sweep", "values")
        sweep = SweepSpec(parameter, values, metric, r.num("sweep", "mode", 1, int))

    cfg_seed = r.num("scenario", "seed", 0, int)
    source = {f"{s}.{k}": v for s in cp.sections() for k, v in cp.items(s)}
    return ScenarioConfig(
        model=model, params=params, grid=grid, initial=initial,
        b_cos=lists["b_cos"], b_sin=lists["b_sin"], forcing=forcing, t_end=t_end, dt=dt,
        output_every=r.num("time", "output_every", 0, int),
        seed=cfg_seed if seed is None else seed, preset=preset, sweep=sweep, source=source)

"""Rotating water waves on a periodic strip and their shallow-water limit."""

from .params import DimensionalScales, Params, RegimeError, depth_floor, from_dimensional, validate
from .spectral import Grid
from .divcurl import solve_divcurl, solve_laplace
from .forcing import PressureForcing
from .waterwaves import MonitorTrip, WaterWaves, WaterWavesState, waterwaves_rhs
from .swe import ShallowWater, SweState, compare_models, q_from_omega, swe_rhs, wkb_reconstruct

__version__ = "0.1.0"

__all__ = [
    "DimensionalScales", "Params", "RegimeError", "depth_floor", "from_dimensional", "validate",
    "Grid", "solve_divcurl", "solve_laplace", "PressureForcing", "MonitorTrip", "WaterWaves",
    "WaterWavesState", "waterwaves_rhs", "ShallowWater", "SweState", "compare_models", "q_from_omega",
    "swe_rhs", "wkb_reconstruct",
]

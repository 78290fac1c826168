"""Flattening of the fluid domain onto the strip and the twisted operators.

The map is (x, z) -> (x, z + sigma(x, z)) with
``sigma = z (eps zeta - beta b) + eps zeta``, so the bottom z=-1 maps to
``-1 + beta b`` and the top z=0 maps to ``eps zeta``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .params import DepthError, Params, depth_floor
from .spectral import Grid


@dataclass(frozen=True)
class Traces:
    surface: np.ndarray        # (3, nx)
    bottom: np.ndarray         # (3, nx)
    tangential: np.ndarray     # (2, nx) surface tangential part A_par
    bottom_tangential: np.ndarray  # (2, nx)
    surface_normal: np.ndarray     # A(z=0) . N
    bottom_normal: np.ndarray      # A(z=-1) . N_b


@dataclass(frozen=True, eq=False)
class SigmaMap:
    grid: Grid
    params: Params
    zeta: np.ndarray
    b: np.ndarray

    # -- geometry --------------------------------------------------------
    @cached_property
    def zeta_x(self):
        return self.grid.ddx(self.zeta)

    @cached_property
    def b_x(self):
        return self.grid.ddx(self.b)

    @cached_property
    def h(self):
        p = self.params
        return 1.0 + p.eps * self.zeta - p.beta * self.b

    @cached_property
    def dz_sigma(self):
        p = self.params
        d = p.eps * self.zeta - p.beta * self.b
        return np.broadcast_to(d[:, None], self.grid.shape)

    @cached_property
    def sigma(self):
        p = self.params
        return self.grid.Z * self.dz_sigma + p.eps * self.zeta[:, None]

    @cached_property
    def dx_sigma(self):
        p = self.params
        slope = p.eps * self.zeta_x - p.beta * self.b_x
        return self.grid.Z * slope[:, None] + p.eps * self.zeta_x[:, None]

    @cached_property
    def is_flat(self):
        return not np.any(self.dx_sigma)

    @cached_property
    def conductivity(self):
        """Pulled-back Laplacian coefficient per node, (3, 3, nx, nz); rows/cols (x, y, z)."""
        sm = self.params.sqrt_mu
        h = self.h[:, None] * np.ones(self.grid.nz)
        sx = self.dx_sigma
        P = np.zeros((3, 3) + self.grid.shape)
        P[0, 0] = h
        P[1, 1] = h
        P[0, 2] = P[2, 0] = -sm * sx
        P[2, 2] = (1.0 + self.params.mu * sx**2) / h
        return P

    @cached_property
    def n_surf(self):
        sm = self.params.sqrt_mu
        z = np.zeros(self.grid.nx)
        return np.stack([-self.params.eps * sm * self.zeta_x, z, 1.0 + z])

    @cached_property
    def n_bott(self):
        sm = self.params.sqrt_mu
        z = np.zeros(self.grid.nx)
        return np.stack([-self.params.beta * sm * self.b_x, z, 1.0 + z])

    # -- twisted derivatives ---------------------------------------------
    def dz_s(self, f):
        """d_z^sigma = (1/(1 + d_z sigma)) d_z."""
        return self.grid.cheb_d_dz(f) / self.h[:, None]

    def dx_s(self, f, fz=None):
        """d_x^sigma = d_x - (d_x sigma / (1 + d_z sigma)) d_z."""
        if fz is None:
            fz = self.grid.cheb_d_dz(f)
        return self.grid.ddx(f, axis=-2) - self.dx_sigma / self.h[:, None] * fz


def build_sigma(zeta, b, p: Params, grid: Grid, check=True) -> SigmaMap:
    zeta = np.asarray(zeta, dtype=float)
    b = np.zeros(grid.nx) if b is None else np.asarray(b, dtype=float)
    if zeta.shape != (grid.nx,) or b.shape != (grid.nx,):
        raise ValueError("zeta and b must live on the horizontal grid")
    if check:
        floor = depth_floor(zeta, b, p)
        if floor.below_h_min:
            raise DepthError(floor.value, p.h_min)
    return SigmaMap(grid, p, zeta, b)


# -- operators -------------------------------------------------------------

def sigma_grad(f, smap: SigmaMap):
    sm = smap.params.sqrt_mu
    fz = smap.grid.cheb_d_dz(f)
    return np.stack([sm * smap.dx_s(f, fz), np.zeros_like(f),
                     fz / smap.h[:, None]])


def sigma_div(A, smap: SigmaMap):
    sm = smap.params.sqrt_mu
    return sm * smap.dx_s(A[0]) + smap.dz_s(A[2])


def sigma_curl(A, smap: SigmaMap):
    """y-invariant curl: (-dz A2, dz A1 - dx A3, dx A2) with twisted derivatives."""
    sm = smap.params.sqrt_mu
    a2z = smap.dz_s(A[1])
    return np.stack([
        -a2z,
        smap.dz_s(A[0]) - sm * smap.dx_s(A[2]),
        sm * smap.dx_s(A[1], smap.grid.cheb_d_dz(A[1])),
    ])


def sigma_laplacian(f, smap: SigmaMap):
    return sigma_div(sigma_grad(f, smap), smap)


def vertical_average(V, smap: SigmaMap):
    """(1/h) int V over the water column; the Jacobian cancels h exactly."""
    return smap.grid.integrate_z(np.asarray(V))


def traces(A, smap: SigmaMap) -> Traces:
    p = smap.params
    sm = p.sqrt_mu
    top = np.asarray(A)[..., -1]
    bot = np.asarray(A)[..., 0]
    tang = np.stack([top[0] / sm + p.eps * top[2] * smap.zeta_x, top[1] / sm])
    btang = np.stack([bot[0] / sm + p.beta * bot[2] * smap.b_x, bot[1] / sm])
    return Traces(
        surface=top,
        bottom=bot,
        tangential=tang,
        bottom_tangential=btang,
        surface_normal=np.einsum("i...,i...->...", top, smap.n_surf),
        bottom_normal=np.einsum("i...,i...->...", bot, smap.n_bott),
    )

"""Fourier multipliers in x and Chebyshev collocation in z.

Field conventions used across the package (y-invariant fields):

* horizontal field   : array ``(nx,)``
* horizontal vector  : array ``(2, nx)``, components (u, v)
* strip field        : array ``(nx, nz)``, z-index 0 is the bottom z=-1
* strip vector       : array ``(3, nx, nz)``
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from numpy.polynomial import chebyshev as C


def cheb_lobatto(n):
    """Gauss-Lobatto nodes on [-1, 1] in ascending order and the
    differentiation matrix acting on values at those nodes."""
    N = n - 1
    j = np.arange(n)
    x = np.cos(np.pi * j / N)
    c = np.where((j == 0) | (j == N), 2.0, 1.0) * (-1.0) ** j
    X = x[:, None] - x[None, :]
    D = np.outer(c, 1.0 / c) / (X + np.eye(n))
    D -= np.diag(D.sum(axis=1))
    return x[::-1].copy(), D[::-1, ::-1].copy()


def clenshaw_curtis_weights(n):
    """Quadrature weights on [-1, 1] for ``n`` Lobatto nodes (any order)."""
    N = n - 1
    theta = np.pi * np.arange(n) / N
    w = np.zeros(n)
    v = np.ones(N - 1)
    inner = slice(1, N)
    if N % 2 == 0:
        w[0] = w[N] = 1.0 / (N**2 - 1)
        for k in range(1, N // 2):
            v -= 2.0 * np.cos(2 * k * theta[inner]) / (4 * k**2 - 1)
        v -= np.cos(N * theta[inner]) / (N**2 - 1)
    else:
        w[0] = w[N] = 1.0 / N**2
        for k in range(1, (N - 1) // 2 + 1):
            v -= 2.0 * np.cos(2 * k * theta[inner]) / (4 * k**2 - 1)
    w[inner] = 2.0 * v / N
    return w  # symmetric, so ascending/descending order agree


@dataclass(frozen=True)
class Grid:
    """Periodic x-grid of ``nx`` nodes times ``nz`` Chebyshev-Lobatto nodes on [-1, 0]."""

    nx: int
    nz: int
    period: float = 2 * math.pi

    def __post_init__(self):
        if self.nx < 8 or self.nx & (self.nx - 1):
            raise ValueError(f"nx must be a power of two >= 8, got {self.nx}")
        if self.nz < 4:
            raise ValueError(f"nz must be >= 4, got {self.nz}")

    # -- horizontal ----------------------------------------------------
    @cached_property
    def x(self):
        return np.arange(self.nx) * (self.period / self.nx)

    @property
    def dx(self):
        return self.period / self.nx

    @cached_property
    def k(self):
        """Nonnegative rfft wavenumbers."""
        return np.arange(self.nx // 2 + 1) * (2 * math.pi / self.period)

    @cached_property
    def ik(self):
        """i*k with the Nyquist entry zeroed (odd derivatives)."""
        ik = 1j * self.k
        ik[-1] = 0.0
        return ik

    @cached_property
    def dealias_mask(self):
        m = np.arange(self.nx // 2 + 1)
        return (m <= self.nx // 3).astype(float)

    @cached_property
    def dx_matrix(self):
        """Dense Fourier differentiation matrix, consistent with :meth:`ddx`."""
        return self.ddx(np.eye(self.nx), axis=0)

    # -- vertical ------------------------------------------------------
    @cached_property
    def _cheb(self):
        return cheb_lobatto(self.nz)

    @cached_property
    def z(self):
        return (self._cheb[0] - 1.0) / 2.0

    @cached_property
    def dz_matrix(self):
        return 2.0 * self._cheb[1]

    @cached_property
    def cc_weights(self):
        """Clenshaw-Curtis weights on [-1, 0]."""
        return 0.5 * clenshaw_curtis_weights(self.nz)

    @cached_property
    def int_from_bottom(self):
        """Matrix giving the antiderivative ``int_{-1}^{z} f`` at the nodes."""
        s = self._cheb[0]
        V = C.chebvander(s, self.nz - 1)
        coef = np.linalg.solve(V, np.eye(self.nz))
        prim = C.chebint(coef, lbnd=-1.0, axis=0)
        return 0.5 * C.chebval(s, prim).T

    @cached_property
    def int_to_surface(self):
        """Matrix giving ``int_{z}^{0} f`` at the nodes."""
        A = self.int_from_bottom
        return A[-1][None, :] - A

    @property
    def shape(self):
        return (self.nx, self.nz)

    @cached_property
    def X(self):
        return np.broadcast_to(self.x[:, None], self.shape)

    @cached_property
    def Z(self):
        return np.broadcast_to(self.z[None, :], self.shape)

    # -- transforms ----------------------------------------------------
    def ddx(self, f, axis=-1, order=1):
        f = np.asarray(f, dtype=float)
        if axis == -1 and f.ndim > 1 and f.shape[-1] != self.nx:
            raise ValueError("x axis must be given for strip fields")
        fh = np.fft.rfft(f, axis=axis)
        shape = [1] * f.ndim
        shape[axis] = -1
        mult = (1j * self.k) ** order
        if order % 2:
            mult[-1] = 0.0
        return np.fft.irfft(fh * mult.reshape(shape), n=self.nx, axis=axis)

    def dealias(self, f, axis=-1):
        """Zero the upper third of horizontal modes (2/3 rule)."""
        f = np.asarray(f, dtype=float)
        shape = [1] * f.ndim
        shape[axis] = -1
        fh = np.fft.rfft(f, axis=axis) * self.dealias_mask.reshape(shape)
        return np.fft.irfft(fh, n=self.nx, axis=axis)

    def multiplier(self, f, symbol, axis=-1):
        """Apply the Fourier multiplier ``symbol(|k|)`` along ``axis``."""
        f = np.asarray(f, dtype=float)
        shape = [1] * f.ndim
        shape[axis] = -1
        m = np.asarray(symbol(self.k), dtype=float)
        return np.fft.irfft(np.fft.rfft(f, axis=axis) * m.reshape(shape),
                            n=self.nx, axis=axis)

    def antiderivative(self, f, axis=-1):
        """Zero-mean periodic g with dg/dx = f - mean(f)."""
        f = np.asarray(f, dtype=float)
        shape = [1] * f.ndim
        shape[axis] = -1
        inv = np.zeros(self.nx // 2 + 1, dtype=complex)
        inv[1:] = 1.0 / (1j * self.k[1:])
        inv[-1] = 0.0
        return np.fft.irfft(np.fft.rfft(f, axis=axis) * inv.reshape(shape),
                            n=self.nx, axis=axis)

    def inv_laplacian(self, f, axis=-1):
        """Zero-mean solution u of u'' = f - mean(f)."""
        f = np.asarray(f, dtype=float)
        shape = [1] * f.ndim
        shape[axis] = -1
        inv = np.zeros(self.nx // 2 + 1)
        inv[1:] = -1.0 / self.k[1:] ** 2
        return np.fft.irfft(np.fft.rfft(f, axis=axis) * inv.reshape(shape),
                            n=self.nx, axis=axis)

    def mean(self, f, axis=-1):
        return np.mean(f, axis=axis)

    def integrate_x(self, f, axis=-1):
        """Trapezoid (spectrally exact) integral over one period."""
        return np.sum(f, axis=axis) * self.dx

    def integrate_z(self, f):
        """Clenshaw-Curtis integral over [-1, 0] along the last axis."""
        return np.asarray(f) @ self.cc_weights

    def cheb_d_dz(self, f):
        return np.asarray(f) @ self.dz_matrix.T

    def fourier_d_dx(self, f, axis=-1):
        return self.ddx(f, axis=axis)


# -- nonlocal horizontal operators ---------------------------------------

def shallow_derivative(f, grid: Grid, mu):
    """|D| / sqrt(1 + sqrt(mu)|D|)."""
    sm = math.sqrt(mu)
    return grid.multiplier(f, lambda k: k / np.sqrt(1.0 + sm * k))


def shallow_derivative_inverse(f, grid: Grid, mu):
    """Zero-mean inverse of :func:`shallow_derivative`; the k=0 mode is dropped."""
    sm = math.sqrt(mu)

    def sym(k):
        out = np.zeros_like(k)
        out[1:] = np.sqrt(1.0 + sm * k[1:]) / k[1:]
        return out
    return grid.multiplier(f, sym)


def bessel_potential(f, grid: Grid, s=1.0):
    """(1 + |D|^2)^(s/2)."""
    return grid.multiplier(f, lambda k: (1.0 + k**2) ** (s / 2.0))


def perp(u):
    """(u, v) -> (-v, u)."""
    u = np.asarray(u)
    return np.stack([-u[1], u[0]])


def grad_over_lap(f, grid: Grid):
    """Zero-mean u with Lap u = div f (only f[0] matters for y-invariant f)."""
    return grid.antiderivative(np.asarray(f)[0])


def perp_over_lap(f, grid: Grid):
    """Zero-mean u with Lap u = perp-div f = -d_y f1 + d_x f2."""
    return grid.antiderivative(np.asarray(f)[1])


@dataclass(frozen=True)
class HodgeParts:
    psi: np.ndarray
    psi_tilde: np.ndarray
    mean: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def reconstruct(self, grid: Grid):
        g = grid.ddx(self.psi)
        gt = grid.ddx(self.psi_tilde)
        return np.stack([g, gt]) + np.asarray(self.mean)[:, None]


def hodge_decompose(u, grid: Grid) -> HodgeParts:
    """u = mean + grad psi + perp-grad psi_tilde with zero-mean potentials."""
    u = np.asarray(u, dtype=float)
    return HodgeParts(grad_over_lap(u, grid), perp_over_lap(u, grid),
                      u.mean(axis=-1))

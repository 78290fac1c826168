"""Elliptic reconstruction of the strip velocity from (zeta, b, psi, omega).

For y-invariant fields the three-dimensional div-curl problem splits into
three scalar problems on the strip, all written with the same conservative
operator ``L u = d_x(F1[u]) + d_z(F3[u])`` where ``(F1, F3)`` is the pulled-back conductivity
applied to the scaled gradient:

* potential part     : L phi = 0, phi = psi on top, F3 = 0 at the bottom
* out-of-plane speed : L U2 = div-form source, U2 given on top, conormal at the bottom
* stream function    : L a = -mu h omega_y, F3 = 0 on top, a = 0 at the bottom

The velocity is ``grad_sigma phi + curl_sigma(a e_y) + U2 e_y`` plus the
uniform part carried by the horizontal mean of the tangential trace.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.linalg as sla
from scipy.sparse.linalg import LinearOperator, gmres

from .params import Params
from .spectral import Grid, shallow_derivative_inverse
from .strip import SigmaMap, Traces, build_sigma, sigma_curl, sigma_div, sigma_grad, traces, vertical_average

log = logging.getLogger(__name__)

TOL_ELL = 1e-9
TOL_DIV = 1e-8
DENSE_LIMIT = 16384


class SolverError(RuntimeError):
    def __init__(self, msg, history=()):
        super().__init__(msg)
        self.history = list(history)


class DivergenceError(ValueError):
    def __init__(self, violation):
        super().__init__(f"omega is not divergence free: max |div| = {violation:.3e}")
        self.violation = violation


@lru_cache(maxsize=64)
def _flat_inverses(nx, nz, period, mu, hbar, top, bottom):
    """Per-mode inverses of the constant-depth operator (with boundary rows)."""
    grid = Grid(nx, nz, period)
    Dz = grid.dz_matrix
    k2 = grid.k**2
    k2[-1] = 0.0  # Nyquist: consistent with twice-applied odd derivative
    base = Dz @ Dz / hbar
    mats = np.empty((k2.size, nz, nz))
    for i, kk in enumerate(k2):
        M = base - mu * hbar * kk * np.eye(nz)
        M[-1] = np.eye(nz)[-1] if top == "dirichlet" else Dz[-1] / hbar
        M[0] = np.eye(nz)[0] if bottom == "dirichlet" else Dz[0] / hbar
        mats[i] = M
    return np.linalg.inv(mats)


class StripOperator:
    """Conservative variable-coefficient operator with boundary rows.

    ``top`` / ``bottom`` select Dirichlet (value) or Neumann (conormal flux
    ``F3``) rows at z=0 / z=-1.
    """

    def __init__(self, smap: SigmaMap, top="dirichlet", bottom="neumann"):
        self.smap = smap
        self.grid = smap.grid
        self.top = top
        self.bottom = bottom
        mu = smap.params.mu
        h = smap.h[:, None]
        sx = smap.dx_sigma
        self.c11 = mu * h * np.ones(self.grid.nz)
        self.c13 = -mu * sx
        self.c33 = (1.0 + mu * sx**2) / h
        self.hbar = float(np.mean(smap.h))
        self.exact_flat = smap.is_flat and np.ptp(smap.h) == 0.0
        self.history = []

    @property
    def size(self):
        return self.grid.nx * self.grid.nz

    def fluxes(self, u):
        Dz = self.grid.dz_matrix
        ux = self.grid.ddx(u, axis=-2)
        uz = u @ Dz.T
        return self.c11 * ux + self.c13 * uz, self.c13 * ux + self.c33 * uz

    def apply(self, u):
        u = np.asarray(u, dtype=float)
        f1, f3 = self.fluxes(u)
        out = self.grid.ddx(f1, axis=-2) + f3 @ self.grid.dz_matrix.T
        out[..., -1] = u[..., -1] if self.top == "dirichlet" else f3[..., -1]
        out[..., 0] = u[..., 0] if self.bottom == "dirichlet" else f3[..., 0]
        return out

    def rhs(self, source=None, flux=None, top=None, bottom=None):
        """Right side for ``L u = d_x G1 + d_z G3 + source`` with boundary data.

        Neumann rows read ``F3[u] - G3 = data``; Dirichlet rows read ``u = data``.
        """
        g = self.grid
        r = np.zeros(g.shape) if source is None else np.array(source, dtype=float)
        G3 = np.zeros(g.shape)
        if flux is not None:
            G1, G3 = flux
            r = r + g.ddx(G1, axis=0) + np.asarray(G3) @ g.dz_matrix.T
        top = np.zeros(g.nx) if top is None else np.broadcast_to(top, (g.nx,))
        bottom = np.zeros(g.nx) if bottom is None else np.broadcast_to(bottom, (g.nx,))
        r[:, -1] = top + (G3[:, -1] if self.top == "neumann" else 0.0)
        r[:, 0] = bottom + (G3[:, 0] if self.bottom == "neumann" else 0.0)
        return r

    def precondition(self, r):
        g = self.grid
        inv = _flat_inverses(g.nx, g.nz, g.period, self.smap.params.mu,
                             round(self.hbar, 12), self.top, self.bottom)
        rh = np.fft.rfft(r, axis=-2)
        uh = np.einsum("kij,...kj->...ki", inv, rh)
        return np.fft.irfft(uh, n=g.nx, axis=-2)

    def dense(self):
        n = self.size
        cols = self.apply(np.eye(n).reshape(n, *self.grid.shape))
        return cols.reshape(n, n).T

    def residual(self, u, r):
        return float(np.linalg.norm(self.apply(u) - r) / max(np.linalg.norm(r), 1e-300))

    def solve(self, r, method="auto", rtol=1e-12, maxiter=4):
        """Solve ``apply(u) = r``; method is auto | flat | krylov | dense."""
        r = np.asarray(r, dtype=float)
        if method == "auto":
            method = "flat" if self.exact_flat else "krylov"
        if method == "flat":
            if not self.exact_flat:
                raise ValueError("flat solve requested on curved geometry")
            return self.precondition(r)
        if method == "krylov":
            u = self._krylov(r, rtol, maxiter)
            if u is not None:
                return u
            if self.size > DENSE_LIMIT:
                raise SolverError("GMRES did not converge", self.history)
            log.warning("GMRES stalled (residuals %s); dense fallback", self.history[-3:])
            method = "dense"
        if method == "dense":
            lu = sla.lu_factor(self.dense())
            return sla.lu_solve(lu, r.ravel()).reshape(self.grid.shape)
        raise ValueError(f"unknown method {method!r}")

    def _krylov(self, r, rtol, maxiter):
        n = self.size
        shape = self.grid.shape
        A = LinearOperator((n, n), matvec=lambda v: self.apply(v.reshape(shape)).ravel(),
                           dtype=float)
        M = LinearOperator((n, n), matvec=lambda v: self.precondition(v.reshape(shape)).ravel(),
                           dtype=float)
        self.history = []
        x0 = self.precondition(r).ravel()
        u, info = gmres(A, r.ravel(), x0=x0, rtol=rtol, atol=0.0, restart=60,
                        maxiter=maxiter, M=M,
                        callback=lambda res: self.history.append(float(res)),
                        callback_type="pr_norm")
        u = u.reshape(shape)
        self.final_residual = self.residual(u, r)
        return u if self.final_residual < TOL_ELL else None


# -- solves ------------------------------------------------------------------

def _as_map(zeta, b, p, grid):
    if isinstance(zeta, SigmaMap):
        return zeta
    return build_sigma(zeta, b, p, grid)


def laplace_operator(smap: SigmaMap):
    return StripOperator(smap, top="dirichlet", bottom="neumann")


def solve_laplace(zeta, b, psi, p: Params = None, grid: Grid = None, mean_flow=0.0,
                  method="auto"):
    """Periodic part of the flattened potential with surface value ``psi``.

    ``zeta`` may also be a prebuilt :class:`SigmaMap`. A uniform horizontal
    stream ``mean_flow`` enters through the bottom conormal condition; the
    full potential is then ``mean_flow * x`` plus the returned field.
    """
    smap = _as_map(zeta, b, p, grid)
    op = laplace_operator(smap)
    flux = None
    if mean_flow:
        mu = smap.params.mu
        flux = (-mu * smap.h[:, None] * mean_flow * np.ones(smap.grid.nz),
                mu * smap.dx_sigma * mean_flow)
    return op.solve(op.rhs(flux=flux, top=np.asarray(psi, dtype=float)), method=method)


def psi_tilde_from_omega(omega, smap: SigmaMap):
    """Zero-mean solution of psi_tilde'' = omega(z=0) . N."""
    wn = traces(omega, smap).surface_normal
    return smap.grid.inv_laplacian(wn)


def bottom_regularity_norm(omega, smap: SigmaMap):
    """|shallow_derivative_inverse(omega_b . N_b)|_2 (diagnostic only)."""
    g = smap.grid
    wb = traces(omega, smap).bottom_normal
    return float(np.sqrt(g.integrate_x(shallow_derivative_inverse(wb, g, smap.params.mu) ** 2)))


@dataclass
class DivCurlSolution:
    smap: SigmaMap
    u_mu: np.ndarray          # (3, nx, nz)
    phi: np.ndarray           # periodic part of the potential
    stream: np.ndarray        # y-component of the vector potential
    psi: np.ndarray
    psi_tilde: np.ndarray
    omega: np.ndarray
    mean_flow: np.ndarray = field(default_factory=lambda: np.zeros(2))

    @property
    def traces(self) -> Traces:
        return traces(self.u_mu, self.smap)

    @property
    def v(self):
        """Horizontal velocity V (= horizontal part of U^mu over sqrt(mu))."""
        return self.u_mu[:2] / self.smap.params.sqrt_mu

    @property
    def w(self):
        return self.u_mu[2]

    @property
    def v_bar(self):
        return vertical_average(self.v, self.smap)

    @property
    def u_par(self):
        return self.traces.tangential


def divergence_violation(omega, smap: SigmaMap):
    return float(np.max(np.abs(sigma_div(omega, smap))))


def solve_divcurl(zeta, b, psi, omega, p: Params = None, grid: Grid = None,
                  mean_flow=(0.0, 0.0), method="auto", check_div=True,
                  tol_div=TOL_DIV) -> DivCurlSolution:
    """Velocity with curl = mu*omega, div = 0, prescribed tangential surface
    trace and impermeable bottom."""
    smap = _as_map(zeta, b, p, grid)
    g = smap.grid
    prm = smap.params
    mu, sm = prm.mu, prm.sqrt_mu
    omega = np.asarray(omega, dtype=float)
    psi = np.asarray(psi, dtype=float)
    m1, m2 = (float(c) for c in mean_flow)
    if check_div:
        viol = divergence_violation(omega, smap)
        if viol > tol_div * max(1.0, float(np.max(np.abs(omega)))):
            raise DivergenceError(viol)

    dn = laplace_operator(smap)
    phi = solve_laplace(smap, None, psi, mean_flow=m1, method=method)
    u = sigma_grad(phi, smap)
    u[0] += sm * m1

    psi_t = np.zeros(g.nx)
    stream = np.zeros(g.shape)
    if np.any(omega):
        psi_t = psi_tilde_from_omega(omega, smap)
        # out-of-plane component: its twisted gradient is (mu w3, -mu w1)
        fx, fz = mu * omega[2], -mu * omega[0]
        flux = (sm * smap.h[:, None] * fx, -sm * smap.dx_sigma * fx + fz)
        top = sm * (g.ddx(psi_t) + m2)
        u[1] = dn.solve(dn.rhs(flux=flux, top=top), method=method)
        if np.any(omega[1]):
            nd = StripOperator(smap, top="neumann", bottom="dirichlet")
            stream = nd.solve(nd.rhs(source=-mu * smap.h[:, None] * omega[1]),
                              method=method)
            u += sigma_curl(np.stack([np.zeros(g.shape), stream, np.zeros(g.shape)]), smap)
    else:
        u[1] = sm * m2
    return DivCurlSolution(smap, u, phi, stream, psi, psi_t, omega,
                           np.array([m1, m2]))


def divcurl_residuals(sol: DivCurlSolution) -> dict:
    """Max-norm residuals of every equation of the div-curl system."""
    smap = sol.smap
    g = smap.grid
    mu = smap.params.mu
    tr = sol.traces
    target = np.stack([g.ddx(sol.psi) + sol.mean_flow[0],
                       g.ddx(sol.psi_tilde) + sol.mean_flow[1]])
    return {
        "curl": float(np.max(np.abs(sigma_curl(sol.u_mu, smap) - mu * sol.omega))),
        "div": float(np.max(np.abs(sigma_div(sol.u_mu, smap)))),
        "tangential": float(np.max(np.abs(tr.tangential - target))),
        "bottom": float(np.max(np.abs(tr.bottom_normal))),
    }


def flux_identity_check(sol: DivCurlSolution):
    """max |U(z=0).N + mu d_x(h Vbar)|."""
    smap = sol.smap
    g = smap.grid
    hv = smap.h * sol.v_bar[0]
    return float(np.max(np.abs(sol.traces.surface_normal
                               + smap.params.mu * g.ddx(hv))))


def surface_curl_identity(A, smap: SigmaMap):
    """max |(curl A)(z=0).N - mu d_x(A_par_y)| and the bottom analogue."""
    g = smap.grid
    mu = smap.params.mu
    c = traces(sigma_curl(A, smap), smap)
    ta = traces(A, smap)
    top = np.max(np.abs(c.surface_normal - mu * g.ddx(ta.tangential[1])))
    bot = np.max(np.abs(c.bottom_normal - mu * g.ddx(ta.bottom_tangential[1])))
    return float(top), float(bot)


def leray_project(omega, smap: SigmaMap, method="auto"):
    """Remove the twisted-divergence of ``omega`` and the mean normal trace.

    Returns the corrected field and the max divergence before correction.
    """
    omega = np.array(omega, dtype=float)
    viol = divergence_violation(omega, smap)
    sm = smap.params.sqrt_mu
    op = laplace_operator(smap)
    # grad_sigma chi must match omega's divergence; conormal data at the bottom is kept
    flux = (sm * smap.h[:, None] * omega[0], -sm * smap.dx_sigma * omega[0] + omega[2])
    r = op.rhs(flux=flux)
    r[:, 0] = 0.0
    chi = op.solve(r, method=method)
    omega -= sigma_grad(chi, smap)
    omega[2] -= np.mean(traces(omega, smap).bottom_normal)
    return omega, viol

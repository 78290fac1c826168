import math

import numpy as np
import pytest
from numpy.polynomial import chebyshev as C

from conftest import smooth_field
from fd_oracle import fd_laplace_richardson
from rotwaves.divcurl import (DivergenceError, StripOperator, bottom_regularity_norm,
                              divcurl_residuals, divergence_violation, flux_identity_check,
                              leray_project, psi_tilde_from_omega, solve_divcurl, solve_laplace)
from rotwaves.params import Params
from rotwaves.spectral import Grid
from rotwaves.strip import build_sigma, sigma_curl, traces


def cosh_profile(g, k, mu):
    sk = math.sqrt(mu) * k
    return np.cos(k * g.X) * np.cosh(sk * (g.Z + 1)) / math.cosh(sk)


def curl_field(g):
    return np.stack([np.sin(g.X) * np.cos(g.Z), np.cos(2 * g.X) * (g.Z**2 + g.Z),
                     np.cos(g.X + 0.3) * np.exp(g.Z)])


@pytest.mark.parametrize("mu", [1.0, 0.01])
@pytest.mark.parametrize("k", [1, 2, 4])
def test_cosh_profile(grid64, mu, k):
    p = Params(eps=0.1, beta=0.1, mu=mu)
    phi = solve_laplace(np.zeros(64), None, np.cos(k * grid64.x), p, grid64)
    assert np.abs(phi - cosh_profile(grid64, k, mu)).max() < 1e-10


def test_constant_surface_gauge():
    g = Grid(16, 8)
    phi = solve_laplace(np.zeros(16), None, np.zeros(16), Params(eps=0.1, beta=0.1, mu=0.1), g)
    assert not np.any(phi)


def test_curved_laplace_against_finite_differences():
    g = Grid(64, 32)
    p = Params(eps=1.0, beta=0.0, mu=0.5)
    psi = lambda x: np.cos(x) + 0.3 * np.sin(2 * x)
    phi = solve_laplace(0.05 * np.cos(g.x), None, psi(g.x), p, g)
    x, z, fd = fd_laplace_richardson(
        64, 64, p.mu, lambda x: 0.05 * np.cos(x), lambda x: -0.05 * np.sin(x),
        lambda x: -0.05 * np.cos(x), psi)
    coef = C.chebfit(2 * g.z + 1, phi.T, g.nz - 1)
    assert np.abs(C.chebval(2 * z + 1, coef) - fd).max() < 1e-6


def test_solver_methods_agree():
    g = Grid(16, 8)
    p = Params(eps=0.2, beta=0.2, mu=0.3)
    smap = build_sigma(np.cos(g.x), np.sin(2 * g.x), p, g)
    psi = np.sin(g.x)
    a = solve_laplace(smap, None, psi, method="krylov")
    b = solve_laplace(smap, None, psi, method="dense")
    assert np.abs(a - b).max() < 1e-10
    with pytest.raises(ValueError):
        solve_laplace(smap, None, psi, method="flat")


def test_operator_residual_after_solve():
    g = Grid(32, 16)
    p = Params(eps=0.1, beta=0.1, mu=0.04)
    op = StripOperator(build_sigma(np.cos(g.x), np.sin(g.x), p, g))
    r = op.rhs(top=np.cos(2 * g.x))
    assert op.residual(op.solve(r), r) < 1e-9


def test_zero_vorticity_reduces_to_laplace(params):
    g = Grid(32, 16)
    smap = build_sigma(np.cos(g.x), np.sin(g.x), params, g)
    psi = 0.3 * np.sin(g.x)
    sol = solve_divcurl(smap, None, psi, np.zeros((3,) + g.shape))
    phi = solve_laplace(smap, None, psi)
    assert np.abs(sol.stream).max() == 0.0
    np.testing.assert_array_equal(sol.phi, phi)


def test_linear_shear_hand_solution(grid64):
    mu = 0.04
    om = np.zeros((3,) + grid64.shape)
    om[1] = 0.7
    sol = solve_divcurl(np.zeros(64), None, np.zeros(64), om, Params(eps=0.1, beta=0.1, mu=mu), grid64)
    assert np.abs(sol.u_mu[0] - mu * 0.7 * grid64.Z).max() < 1e-10
    assert np.abs(sol.u_mu[1:]).max() < 1e-10


def test_curved_residuals(grid64):
    p = Params(eps=0.1, beta=0.1, mu=0.04)
    smap = build_sigma(np.cos(grid64.x), np.sin(grid64.x), p, grid64)
    om = sigma_curl(curl_field(grid64), smap)
    sol = solve_divcurl(smap, None, 0.3 * np.sin(grid64.x) + 0.1 * np.cos(2 * grid64.x), om,
                        mean_flow=(0.2, 0.1))
    res = divcurl_residuals(sol)
    assert max(res.values()) < 1e-8, res
    assert flux_identity_check(sol) < 1e-8


def test_flux_identity_flat_irrotational(rng):
    g = Grid(32, 16)
    p = Params(eps=0.1, beta=0.1, mu=0.2)
    sol = solve_divcurl(np.zeros(32), None, smooth_field(g, rng), np.zeros((3,) + g.shape), p, g)
    assert flux_identity_check(sol) < 1e-10


def test_flux_identity_rest_state():
    g = Grid(16, 8)
    sol = solve_divcurl(np.zeros(16), None, np.zeros(16), np.zeros((3,) + g.shape),
                        Params(eps=0.1, beta=0.1, mu=0.2), g)
    assert flux_identity_check(sol) == 0.0


def test_solution_surface_curl_identity(params):
    from rotwaves.divcurl import surface_curl_identity
    g = Grid(32, 16)
    smap = build_sigma(np.cos(g.x), np.sin(g.x), params, g)
    sol = solve_divcurl(smap, None, 0.2 * np.cos(g.x), sigma_curl(curl_field(g), smap))
    assert max(surface_curl_identity(sol.u_mu, smap)) < 1e-9


def test_divergent_vorticity_rejected(params):
    g = Grid(16, 8)
    om = np.zeros((3,) + g.shape)
    om[2] = g.Z
    with pytest.raises(DivergenceError):
        solve_divcurl(np.zeros(16), None, np.zeros(16), om, params, g)


def test_deterministic_and_linear(params):
    g = Grid(32, 12)
    smap = build_sigma(np.cos(g.x), np.sin(g.x), params, g)
    om = sigma_curl(curl_field(g), smap)
    psi1, psi2 = np.sin(g.x), 0.4 * np.cos(2 * g.x)
    a = solve_divcurl(smap, None, psi1, om)
    b = solve_divcurl(smap, None, psi1, om)
    np.testing.assert_array_equal(a.u_mu, b.u_mu)
    c = solve_divcurl(smap, None, psi2, 0 * om)
    d = solve_divcurl(smap, None, psi1 + psi2, om)
    assert np.abs(a.u_mu + c.u_mu - d.u_mu).max() < 1e-9


def test_psi_tilde_examples(params):
    g = Grid(32, 8)
    flat = build_sigma(np.zeros(32), None, params, g)
    om = np.zeros((3,) + g.shape)
    assert not np.any(psi_tilde_from_omega(om, flat))
    om[2] = np.cos(g.X)
    np.testing.assert_allclose(psi_tilde_from_omega(om, flat), -np.cos(g.x), atol=1e-14)


def test_psi_tilde_residual_on_curved_surface(params):
    g = Grid(32, 12)
    smap = build_sigma(np.cos(g.x), np.sin(g.x), params, g)
    om = sigma_curl(curl_field(g), smap)
    pt = psi_tilde_from_omega(om, smap)
    wn = traces(om, smap).surface_normal
    assert np.abs(g.ddx(pt, order=2) - (wn - wn.mean())).max() < 1e-12


def test_leray_keeps_divergence_free_fields(params):
    g = Grid(32, 16)
    smap = build_sigma(np.cos(g.x), np.sin(g.x), params, g)
    om = sigma_curl(curl_field(g), smap)
    fixed, viol = leray_project(om, smap)
    assert viol < 1e-9
    assert np.abs(fixed - om).max() < 1e-9


def test_leray_removes_divergence(params):
    g = Grid(32, 16)
    smap = build_sigma(np.cos(g.x), np.sin(g.x), params, g)
    om = sigma_curl(curl_field(g), smap)
    om[2] += 0.3 * np.sin(g.X) * g.Z
    fixed, viol = leray_project(om, smap)
    assert viol > 0.1
    assert divergence_violation(fixed, smap) < 1e-8
    assert abs(traces(fixed, smap).bottom_normal.mean()) < 1e-12


def test_bottom_regularity_norm_is_finite(params):
    g = Grid(32, 12)
    smap = build_sigma(np.cos(g.x), np.sin(g.x), params, g)
    assert 0 < bottom_regularity_norm(sigma_curl(curl_field(g), smap), smap) < np.inf


def test_mean_flow_is_uniform_on_flat_strip(params):
    g = Grid(16, 8)
    sol = solve_divcurl(np.zeros(16), None, np.zeros(16), np.zeros((3,) + g.shape), params, g,
                        mean_flow=(0.3, -0.1))
    np.testing.assert_allclose(sol.v[0], 0.3, atol=1e-13)
    np.testing.assert_allclose(sol.v[1], -0.1, atol=1e-13)
    np.testing.assert_allclose(sol.w, 0, atol=1e-13)

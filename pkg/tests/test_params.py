import math

import numpy as np
import pytest

from rotwaves.params import (DimensionalScales, GridMismatchError, Params, RegimeError,
                             depth_floor, from_dimensional, validate)

MID_LATITUDE = DimensionalScales(a=1.0, H=1000.0, L=100_000.0, f=1e-4)


def test_mid_latitude_shallowness():
    assert from_dimensional(MID_LATITUDE).mu == pytest.approx(1e-4, rel=1e-15)


def test_mid_latitude_rotation_ratio():
    p = from_dimensional(MID_LATITUDE)
    # eps/ro = f L / sqrt(g H)
    assert p.eps / p.ro == pytest.approx(1e-4 * 1e5 / math.sqrt(9.81 * 1000), rel=1e-12)
    assert p.eps / p.ro == pytest.approx(0.101, abs=5e-4)
    assert validate(p).ok


def test_round_trip_scales():
    s = DimensionalScales(a=2.0, a_bott=30.0, H=400.0, L=8000.0, f=1e-4, g=9.8)
    p = from_dimensional(s)
    assert p.eps * s.H == pytest.approx(s.a)
    assert p.beta * s.H == pytest.approx(s.a_bott)
    assert math.sqrt(p.mu) * s.L == pytest.approx(s.H)


def test_zero_amplitude_is_rejected():
    with pytest.raises(RegimeError):
        DimensionalScales(a=0.0, H=1000.0, L=1e5, f=1e-4)
    with pytest.raises(RegimeError, match="0 < eps"):
        Params(eps=0.0, beta=0.1, mu=0.01)


def test_validate_reports_each_inequality():
    report = validate(0.1, 0.1, 0.01, 1.0)
    assert report.ok
    assert len(report.checks) == 7
    assert dict((n, m) for n, _, m in report.checks)["eps/ro <= 1"] == pytest.approx(0.9)


@pytest.mark.parametrize("kwargs, failing", [
    (dict(eps=1.2, beta=0.1, mu=0.01), "eps <= 1"),
    (dict(eps=0.5, beta=0.1, mu=0.01, ro=0.25), "eps/ro <= 1"),
    (dict(eps=0.5, beta=1.5, mu=0.01), "beta <= 1"),
    (dict(eps=0.5, beta=0.0, mu=2.0), "mu <= mu_max"),
])
def test_validate_flags_violations(kwargs, failing):
    assert validate(**kwargs).failures() == [failing]
    with pytest.raises(RegimeError, match=failing.replace("/", "/")):
        Params(**kwargs)


def test_beta_zero_is_allowed():
    assert Params(eps=0.1, beta=0.0, mu=0.01).beta == 0.0


def test_infinite_rossby_switches_rotation_off():
    p = Params(eps=0.1, beta=0.0, mu=0.01)
    assert p.inv_ro == 0.0
    assert Params(eps=0.1, beta=0.0, mu=0.01, ro=2.0).inv_ro == 0.5


def test_depth_floor_rest_state():
    p = Params(eps=0.2, beta=0.2, mu=0.01)
    z = np.zeros(16)
    floor = depth_floor(z, z, p)
    assert floor.value == 1.0 and not floor.below_h_min


def test_depth_floor_dry_state_is_flagged():
    p = Params(eps=0.1, beta=1.0, mu=0.01)
    floor = depth_floor(np.zeros(16), np.ones(16), p)
    assert floor.value == 0.0 and floor.below_h_min


def test_depth_floor_cancellation_matches_brute_force():
    x = np.linspace(0, 2 * np.pi, 64, endpoint=False)
    p = Params(eps=0.2, beta=0.2, mu=0.01)
    zeta = b = 0.5 * np.cos(x)
    brute = min(1 + 0.2 * zi - 0.2 * bi for zi, bi in zip(zeta, b))
    assert depth_floor(zeta, b, p).value == pytest.approx(brute) == pytest.approx(1.0)


def test_depth_floor_grid_mismatch():
    with pytest.raises(GridMismatchError):
        depth_floor(np.zeros(8), np.zeros(16), Params(eps=0.1, beta=0.1, mu=0.1))

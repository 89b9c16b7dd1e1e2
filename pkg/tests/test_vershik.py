import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bernoulli_ensembles.errors import DomainError, GridTooCoarse
from bernoulli_ensembles.inversion import invert
from bernoulli_ensembles.profile import MacroState, ProfileParams
from bernoulli_ensembles.vershik import (
    SQRT2,
    BoseCurveParams,
    bose_h,
    bose_h_prime,
    bose_L,
    bose_L_prime,
    bose_L_second,
    bose_ode_residual,
    gamma_scale,
    identify_curves,
    ode_residual,
    rotate_to_fermi,
    rotated_coordinates,
    slope_profile,
)
from bernoulli_ensembles.young import Curve, limit_curve

params = st.builds(BoseCurveParams, st.floats(0.05, 0.95), st.floats(-8.0, 8.0))


@given(params)
def test_L_endpoints(p):
    assert abs(bose_L(0.0, p)) <= 1e-12
    assert abs(bose_L(1.0, p) - (1 - 2 * p.rho_bar)) <= 1e-12


@pytest.mark.parametrize("c", [-3.0, -0.7, 0.2, 2.5])
def test_L_matches_raw_definition(c):
    p = BoseCurveParams(0.35, c)
    t = np.linspace(0.0, 1.0, 11)
    raw = np.log(bose_h(t, p) / bose_h(0.0, p)) / c
    np.testing.assert_allclose(bose_L(t, p), raw, atol=1e-13)


def test_small_c_limit_is_linear():
    # first order in c from L'' = c (1 - L'^2) with L' ~ 1 - 2 rho
    rho, c = 0.3, 1e-4
    p = BoseCurveParams(rho, c)
    t = np.linspace(0.0, 1.0, 21)
    series = t * (1 - 2 * rho) + 2 * c * rho * (1 - rho) * t * (t - 1)
    np.testing.assert_allclose(bose_L(t, p), series, atol=1e-8)
    np.testing.assert_allclose(bose_L(t, BoseCurveParams(rho, 1e-7)), t * (1 - 2 * rho), atol=1e-7)


def test_zero_c_is_linear():
    p = BoseCurveParams(0.3, 0.0)
    assert bose_L(0.5, p) == pytest.approx(0.2)
    assert bose_L_prime(0.5, p) == pytest.approx(0.4)
    assert bose_L_second(0.5, p) == 0.0


@given(params)
def test_L_prime_matches_h_ratio(p):
    if not 1e-3 <= abs(p.c_bar) <= 5:
        return  # the raw exponentials cancel or lose digits out here
    t = np.linspace(0.05, 0.95, 7)
    ratio = bose_h_prime(t, p) / (p.c_bar * bose_h(t, p))
    np.testing.assert_allclose(bose_L_prime(t, p), ratio, atol=1e-9)
    assert np.all(np.abs(bose_L_prime(t, p)) < 1)


@pytest.mark.parametrize("c", [-2.0, 0.5, 3.0])
def test_h_second_derivative(c):
    p = BoseCurveParams(0.4, c)
    t = np.linspace(0.1, 0.9, 9)
    eps = 1e-4
    h2 = (bose_h(t + eps, p) - 2 * bose_h(t, p) + bose_h(t - eps, p)) / eps**2
    np.testing.assert_allclose(h2, c * c * bose_h(t, p), rtol=1e-6)


@pytest.mark.parametrize("c", [-2.0, 0.5, 3.0])
def test_L_second_identity(c):
    p = BoseCurveParams(0.6, c)
    t = np.linspace(0.1, 0.9, 9)
    eps = 1e-4
    fd = (bose_L(t + eps, p) - 2 * bose_L(t, p) + bose_L(t - eps, p)) / eps**2
    np.testing.assert_allclose(fd, c * (1 - bose_L_prime(t, p) ** 2), atol=1e-6)
    assert bose_ode_residual(p, 4097) < 1e-6


def test_t_outside_unit_interval():
    with pytest.raises(DomainError):
        bose_L(1.5, BoseCurveParams(0.5, 1.0))


def test_params_validated():
    with pytest.raises(DomainError):
        BoseCurveParams(1.0, 1.0)


@given(params)
def test_fermi_curve_normalization(p):
    c = rotate_to_fermi(p, 257)
    assert c.values[-1] == 0.0
    assert c.grid[-1] == SQRT2
    assert c.values[0] == pytest.approx(SQRT2 * p.rho_bar, abs=1e-10)
    inner = -c.d1[1:-1]
    assert np.all((inner > 0) & (inner < 1))


@given(params)
def test_slope_transform(p):
    t = np.linspace(0.05, 0.95, 9)
    lp = bose_L_prime(t, p)
    s = (lp - 1) / (lp + 1)
    np.testing.assert_allclose(slope_profile(t, p), -s / (1 - s), atol=1e-12)


def test_rotation_coordinates():
    p = BoseCurveParams(0.3, 1.5)
    u, v = rotated_coordinates(np.array([0.0, 1.0]), p)
    assert u[0] == 0.0 and v[0] == 0.0
    assert u[1] == pytest.approx((2 - 2 * 0.3) / SQRT2)
    assert v[1] == pytest.approx(-2 * 0.3 / SQRT2)


@given(params)
def test_fermi_ode(p):
    c = rotate_to_fermi(p, 513)
    assert ode_residual(c, SQRT2 * p.c_bar) < 1e-6


def test_fermi_ode_finite_differences():
    p = BoseCurveParams(0.4, 1.2)
    assert ode_residual(rotate_to_fermi(p, 2049), SQRT2 * p.c_bar, analytic=False) < 1e-6


def test_gamma_scale():
    p = BoseCurveParams(0.4, -1.1)
    c = rotate_to_fermi(p, 257)
    same = gamma_scale(c, 1.0)
    np.testing.assert_array_equal(same.values, c.values)
    g = 0.5
    s = gamma_scale(c, g)
    assert s.values[0] == pytest.approx(c.values[0] / g)
    assert s.grid[-1] == pytest.approx(c.grid[-1] / g)
    assert ode_residual(s, SQRT2 * p.c_bar * g) < 1e-12
    assert ode_residual(s, SQRT2 * p.c_bar * g, analytic=False) < 1e-5


@pytest.mark.parametrize("a,b", [(0.3, 10.0), (0.7, -10.0), (0.5, 0.0), (0.4, 1e-3), (0.2, -3.3)])
def test_limit_curve_ode(a, b):
    assert ode_residual(limit_curve(ProfileParams(a, b)), -b) < 1e-8


def test_linear_curve_residual():
    x = np.linspace(0, 1, 9)
    for s in (0.0, -1.0, -0.3):
        r = ode_residual(Curve(x, s * x), 2.0, analytic=False)
        assert r == pytest.approx(abs(2.0 * s * (1 + s)), abs=1e-12)


def test_coarse_grid():
    with pytest.raises(GridTooCoarse):
        ode_residual(Curve([0, 1, 2, 3], [0, 0, 0, 0]), 1.0)


@pytest.mark.parametrize("rho,m,bound", [(0.5, 0.0, 1e-12), (0.4, 0.05, 1e-8), (0.3, -0.04, 1e-8)])
def test_identify_examples(rho, m, bound):
    assert identify_curves(rho, m) < bound


@settings(max_examples=25, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(-0.9, 0.9))
def test_identify_property(rho, frac):
    assert identify_curves(rho, frac * rho * (1 - rho) / 2, 257) < 1e-8


def test_identify_outside_domain():
    with pytest.raises(DomainError):
        identify_curves(0.5, 0.3)

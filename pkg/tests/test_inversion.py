import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bernoulli_ensembles.errors import NoConvergence, OutOfDomain
from bernoulli_ensembles.inversion import (
    a_of_b_rho,
    invert,
    logit_a_of_b_rho,
    profile_on_density_curve,
    safeguarded_newton,
)
from bernoulli_ensembles.profile import F, G, MacroState, ProfileParams, beta, phi


def test_symmetric_point_is_untilted():
    res = invert(MacroState(0.5, 0.0))
    assert res.params.a == 0.5 and res.params.b == 0.0


def test_round_trip_example():
    p = invert(MacroState(0.4, 0.05)).params
    back = phi(p)
    assert abs(back.rho - 0.4) < 1e-10 and abs(back.m - 0.05) < 1e-10


def test_near_boundary_needs_large_tilt():
    rho = 0.3
    res = invert(MacroState(rho, 0.999 * rho * (1 - rho) / 2))
    assert res.params.b > 20


def test_margin_rejects_boundary():
    rho = 0.3
    with pytest.raises(OutOfDomain):
        invert(MacroState(rho, (1 - 1e-9) * rho * (1 - rho) / 2))


def test_out_of_domain_state():
    with pytest.raises(OutOfDomain):
        MacroState(0.3, 0.2)


@given(st.floats(0.05, 0.95), st.floats(-30, 30))
def test_density_curve_holds_rho(rho, b):
    assert F(profile_on_density_curve(b, rho)) == pytest.approx(rho, abs=1e-12)


def test_density_curve_untilted():
    assert a_of_b_rho(0.0, 0.37) == pytest.approx(0.37, abs=1e-15)


def test_density_curve_profile_saturates():
    # for large b the profile is close to a unit step at x = 1 - 2 rho
    p = profile_on_density_curve(100.0, 0.3)
    assert beta(0.6, p) > 0.99
    assert beta(0.2, p) < 0.01


def test_density_curve_continuous_at_zero():
    assert logit_a_of_b_rho(1e-9, 0.3) == pytest.approx(math.log(0.3 / 0.7), abs=1e-8)


@settings(max_examples=80)
@given(st.floats(0.02, 0.98), st.floats(-0.95, 0.95))
def test_round_trip_property(rho, frac):
    m = frac * rho * (1 - rho) / 2
    res = invert(MacroState(rho, m))
    back = phi(res.params)
    assert abs(back.rho - rho) < 1e-10
    assert abs(back.m - m) < 1e-10
    assert max(res.residual) <= 1e-10


@settings(max_examples=40)
@given(st.floats(0.05, 0.95), st.floats(-15, 15))
def test_forward_then_inverse_recovers_parameters(a, b):
    s = phi(ProfileParams(a, b))
    p = invert(s).params
    assert p.b == pytest.approx(b, abs=1e-6)
    assert p.a == pytest.approx(a, abs=1e-8)


@given(st.floats(0.05, 0.95), st.floats(0.01, 0.9))
def test_tilt_sign_follows_moment(rho, frac):
    m = frac * rho * (1 - rho) / 2
    assert invert(MacroState(rho, m)).params.b > 0
    assert invert(MacroState(rho, -m)).params.b < 0


def test_newton_finds_root():
    x, _ = safeguarded_newton(lambda x: (x**3 - 2.0, 3 * x * x), 0.0, 3.0, 1e-14)
    assert x == pytest.approx(2 ** (1 / 3), abs=1e-13)


def test_newton_iteration_cap():
    with pytest.raises(NoConvergence):
        safeguarded_newton(lambda x: (x - 0.3, 0.0), 0.0, 1.0, 1e-15, max_iter=3)


def test_density_curve_example():
    assert F(ProfileParams(a_of_b_rho(2.0, 0.5), 2.0)) == pytest.approx(0.5, abs=1e-12)
    assert a_of_b_rho(0.0, 0.4) == 0.4


def test_density_curve_at_moderate_tilt():
    # transition at 1 - 2 rho = 0.4 has width of order 1/b
    p = profile_on_density_curve(30.0, 0.3)
    assert beta(0.6, p) > 0.99
    assert beta(0.2, p) < 0.01
    assert 0.9 < beta(0.5, p) < 0.99


@pytest.mark.parametrize("rho", [0.1, 0.5, 0.85])
def test_scalar_residual_monotone(rho):
    bs = np.linspace(-40, 40, 200)
    gs = [G(profile_on_density_curve(b, rho)) for b in bs]
    assert all(x <= y for x, y in zip(gs, gs[1:]))
    assert gs[-1] < rho * (1 - rho) / 2 and gs[0] > -rho * (1 - rho) / 2

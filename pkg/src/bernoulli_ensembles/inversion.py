"""Inverse of the map (a, b) -> (rho, m).

Fixing ``F(a, b) = rho`` determines ``a`` in closed form as a function of
``b``; what remains is a monotone scalar equation ``G(a(b), b) = m`` solved
by bracketing plus safeguarded Newton.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .errors import NoConvergence, OutOfDomain
from .profile import MacroState, ProfileParams, moment_jet

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 200
DEFAULT_MARGIN = 1e-6
B_CAP = 2.0**14


@dataclass(frozen=True)
class InversionResult:
    params: ProfileParams
    residual: tuple[float, float]
    iterations: int


def _log_abs_expm1(x: float) -> float:
    if x > 0.0:
        return x + math.log(-math.expm1(-x))
    return math.log(-math.expm1(x))


def logit_a_of_b_rho(b: float, rho: float) -> float:
    """``logit(a)`` on the curve ``F(a, b) = rho``."""
    if abs(b) < 1e-200:
        return math.log(rho) - math.log1p(-rho)
    return (
        _log_abs_expm1(2.0 * b * rho)
        - _log_abs_expm1(2.0 * b * (1.0 - rho))
        - b * (2.0 * rho - 1.0)
    )


def a_of_b_rho(b: float, rho: float) -> float:
    """The unique ``a`` with ``F(a, b) = rho``; ``b = 0`` gives ``rho``."""
    return ProfileParams.from_logit(logit_a_of_b_rho(b, rho), b).a


def profile_on_density_curve(b: float, rho: float) -> ProfileParams:
    return ProfileParams.from_logit(logit_a_of_b_rho(b, rho), b)


def _scalar_residual(rho: float, m: float) -> Callable[[float], tuple[float, float]]:
    def f(b: float) -> tuple[float, float]:
        p = profile_on_density_curve(b, rho)
        _, G, F_t, F_b, G_t, G_b = moment_jet(p)
        # total derivative of G along F = rho
        return G - m, G_b - G_t * F_b / F_t

    return f


def safeguarded_newton(
    f: Callable[[float], tuple[float, float]],
    lo: float,
    hi: float,
    tol: float,
    max_iter: int = DEFAULT_MAX_ITER,
) -> tuple[float, int]:
    """Root of an increasing ``f`` bracketed by ``[lo, hi]``.

    ``f`` returns ``(value, derivative)``. Newton steps that leave the
    bracket or fail to halve the previous step are replaced by bisection.
    Stops when ``|value| <= tol`` or the bracket is exhausted.
    """
    x = 0.5 * (lo + hi)
    fx, dfx = f(x)
    step_old = hi - lo
    for it in range(1, max_iter + 1):
        if abs(fx) <= tol:
            return x, it
        if fx < 0.0:
            lo = x
        else:
            hi = x
        newton_ok = dfx > 0.0 and lo < x - fx / dfx < hi and abs(fx / dfx) < 0.5 * step_old
        if newton_ok:
            step = fx / dfx
            x_new = x - step
        else:
            x_new = 0.5 * (lo + hi)
            step = x - x_new
        step_old = abs(step)
        if x_new == x or hi - lo <= 4.0 * math.ulp(max(abs(lo), abs(hi))):
            fx, dfx = f(x_new)
            x = x_new
            if abs(fx) <= tol:
                return x, it
            raise NoConvergence(f"bracket exhausted at x={x} with residual {fx:.3e}")
        x = x_new
        fx, dfx = f(x)
    if abs(fx) <= tol:
        return x, max_iter
    raise NoConvergence(f"no convergence in {max_iter} iterations (residual {fx:.3e})")


def invert(
    target: MacroState,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    margin: float = DEFAULT_MARGIN,
) -> InversionResult:
    """Find (a, b) with ``F(a, b) = rho`` and ``G(a, b) = m`` to within ``tol``."""
    rho, m = target.rho, target.m
    half_v = 0.5 * target.v
    if abs(m) > (1.0 - margin) * half_v:
        raise OutOfDomain(
            f"|m| = {abs(m):.6g} is within the relative margin {margin:g} of v/2 = {half_v:.6g}"
        )
    if m == 0.0:
        p = profile_on_density_curve(0.0, rho)
        return InversionResult(p, (abs(p.a - rho), 0.0), 0)

    f = _scalar_residual(rho, m)
    # G(a(b), b) is increasing in b and vanishes at b = 0
    lo, hi = (0.0, 1.0) if m > 0 else (-1.0, 0.0)
    while True:
        edge = hi if m > 0 else lo
        r = f(edge)[0]
        if (m > 0 and r >= 0.0) or (m < 0 and r <= 0.0):
            break
        if abs(edge) >= B_CAP:
            raise OutOfDomain(f"tilt |b| would exceed {B_CAP:g}; (rho, m) too close to the boundary")
        if m > 0:
            lo, hi = hi, 2.0 * hi
        else:
            lo, hi = 2.0 * lo, lo

    b, iterations = safeguarded_newton(f, lo, hi, tol, max_iter)
    p = profile_on_density_curve(b, rho)
    F, G = moment_jet(p)[:2]
    return InversionResult(p, (abs(F - rho), abs(G - m)), iterations)

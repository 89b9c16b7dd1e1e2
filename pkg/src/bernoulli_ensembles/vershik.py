"""The Bose-statistics curve in a box and its identification with the limit height curve.

The unrestricted-parts curve ``L(t)`` on [0, 1] is rotated by 45 degrees;
its slope transform gives a restricted-parts profile whose height curve,
rescaled by ``1/sqrt(2)`` and shifted onto [-1, 1], coincides with the
limit curve of the tilted Bernoulli ensemble when the parameters match.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit, exprel

from .errors import DomainError, GridTooCoarse
from .inversion import DEFAULT_TOL, invert
from .profile import MacroState
from .young import DEFAULT_GRID, Curve, limit_curve, sup_distance

SQRT2 = math.sqrt(2.0)
# the unit-area curve on [0, inf) solves psi'' + VERSHIK_C psi' (1 + psi') = 0
VERSHIK_C = math.pi / math.sqrt(12.0)
SMALL_C = 1e-8


@dataclass(frozen=True)
class BoseCurveParams:
    """Box parameter ``rho_bar`` in (0, 1) and area parameter ``c_bar``."""

    rho_bar: float
    c_bar: float

    def __post_init__(self) -> None:
        if not (0.0 < self.rho_bar < 1.0):
            raise DomainError(f"rho_bar must lie in (0, 1), got {self.rho_bar}")
        if not math.isfinite(self.c_bar):
            raise DomainError(f"c_bar must be finite, got {self.c_bar}")


def bose_h(t, p: BoseCurveParams):
    """``h(t)`` by its four-exponential definition (overflows for large ``|c_bar|``)."""
    c, r = p.c_bar, p.rho_bar
    t = np.asarray(t, dtype=float)
    out = (
        np.exp(-c * t)
        - np.exp(c * t)
        + np.exp(-c * (2.0 - 2.0 * r - t))
        - np.exp(-c * (t - 2.0 * r))
    )
    return float(out) if out.ndim == 0 else out


def bose_h_prime(t, p: BoseCurveParams):
    c, r = p.c_bar, p.rho_bar
    t = np.asarray(t, dtype=float)
    out = c * (
        -np.exp(-c * t)
        - np.exp(c * t)
        + np.exp(-c * (2.0 - 2.0 * r - t))
        + np.exp(-c * (t - 2.0 * r))
    )
    return float(out) if out.ndim == 0 else out


def _log_ratio(p: BoseCurveParams) -> float:
    """``log(B / A)`` where ``h(t) = A e^{-ct} + B e^{ct}``.

    ``A = -expm1(2 c rho)`` and ``B = expm1(-2 c (1 - rho))`` always share a
    sign; writing both through ``exprel`` keeps the ratio exact as ``c -> 0``.
    """
    c, r = p.c_bar, p.rho_bar
    out = (
        math.log1p(-r)
        - math.log(r)
        + math.log(exprel(-2.0 * c * (1.0 - r)))
        - math.log(exprel(2.0 * c * r))
    )
    if not math.isfinite(out):
        raise DomainError(f"h(t)/h(0) is not representable for {p}")
    return out


def _check_t(t: np.ndarray) -> None:
    if np.any(t < 0.0) or np.any(t > 1.0):
        raise DomainError("t must lie in [0, 1]")


def bose_L(t, p: BoseCurveParams):
    """``L(t) = log(h(t) / h(0)) / c_bar``; ``c_bar = 0`` gives ``t (1 - 2 rho_bar)``."""
    t = np.asarray(t, dtype=float)
    _check_t(t)
    c = p.c_bar
    r = p.rho_bar
    if abs(c) < SMALL_C:
        # first order in c; the next term is O(c^2), below rounding here
        out = t * (1.0 - 2.0 * r) + 2.0 * c * r * (1.0 - r) * t * (t - 1.0)
    else:
        lr = _log_ratio(p)
        if abs(c) < 1.0:
            # h(t)/h(0) = e^{-ct} (1 + w expm1(2ct)), w = B/(A+B)
            w = expit(lr)
            arg = w * np.expm1(2.0 * c * t)
            if np.any(arg <= -1.0):
                raise DomainError(f"h(t)/h(0) is not positive for {p}")
            out = -t + np.log1p(arg) / c
        else:
            # log(A e^{-ct} + B e^{ct}) - log(A + B), signs of A and B agree
            out = (
                np.logaddexp(-c * t, lr + c * t) - np.logaddexp(0.0, lr)
            ) / c
    out = out + 0.0  # no negative zero at t = 0
    return float(out) if out.ndim == 0 else out


def bose_L_prime(t, p: BoseCurveParams):
    """``L'(t) = tanh(c t + log(B/A) / 2)``."""
    t = np.asarray(t, dtype=float)
    if p.c_bar == 0.0:
        out = np.full_like(t, 1.0 - 2.0 * p.rho_bar)
    else:
        out = np.tanh(p.c_bar * t + 0.5 * _log_ratio(p))
    return float(out) if out.ndim == 0 else out


def bose_L_second(t, p: BoseCurveParams):
    """``L''(t) = c_bar (1 - L'(t)^2)``."""
    lp = np.asarray(bose_L_prime(t, p))
    out = p.c_bar * (1.0 - lp * lp)
    return float(out) if out.ndim == 0 else out


def rotated_coordinates(t, p: BoseCurveParams) -> tuple[np.ndarray, np.ndarray]:
    """``(u, v) = ((t + L) / sqrt2, (L - t) / sqrt2)``."""
    t = np.asarray(t, dtype=float)
    L = np.asarray(bose_L(t, p))
    return (t + L) / SQRT2, (L - t) / SQRT2


def slope_profile(t, p: BoseCurveParams):
    """``beta_bar(sqrt2 t)`` from the slope ``dv/du`` of the rotated curve."""
    lp = np.asarray(bose_L_prime(t, p))
    # dv/du = (L' - 1)/(L' + 1) =: s and beta_bar = -s/(1 - s) simplify to (1 - L')/2
    out = 0.5 * (1.0 - lp)
    return float(out) if out.ndim == 0 else out


def rotate_to_fermi(p: BoseCurveParams, grid_points: int = DEFAULT_GRID) -> Curve:
    """``psi_bar`` on [0, sqrt2] with ``psi_bar(sqrt2) = 0`` and ``psi_bar' = -beta_bar``.

    Integrating ``beta_bar(sqrt2 s) = (1 - L'(s))/2`` from ``t`` to 1 gives
    ``psi_bar(sqrt2 t) = ((1 - t) - L(1) + L(t)) / sqrt2`` exactly.
    """
    if grid_points < 2:
        raise ValueError("grid_points must be at least 2")
    t = np.linspace(0.0, 1.0, grid_points)
    L = np.asarray(bose_L(t, p))
    L1 = 1.0 - 2.0 * p.rho_bar
    values = ((1.0 - t) - L1 + L) / SQRT2
    values[-1] = 0.0
    d1 = -np.asarray(slope_profile(t, p))
    d2 = np.asarray(bose_L_second(t, p)) / (2.0 * SQRT2)
    grid = SQRT2 * t
    grid[-1] = SQRT2
    return Curve(grid, values, d1=d1, d2=d2)


def gamma_scale(c: Curve, gamma: float) -> Curve:
    """``x -> c(gamma x) / gamma`` on ``[x0 / gamma, x1 / gamma]``; the ODE coefficient picks up a factor ``gamma``."""
    if not gamma > 0.0:
        raise DomainError(f"gamma must be positive, got {gamma}")
    d2 = None if c.d2 is None else c.d2 * gamma
    return Curve(c.grid / gamma, c.values / gamma, c.kind, c.d1, d2)


def ode_residual(c: Curve, coeff: float, analytic: bool = True) -> float:
    """``max |psi'' + coeff psi' (1 + psi')|`` over the interior grid points.

    Uses the curve's own derivatives when present and ``analytic`` is set,
    otherwise second-order central differences on a uniform grid.
    """
    if analytic and c.d1 is not None and c.d2 is not None:
        d1, d2 = c.d1[1:-1], c.d2[1:-1]
    else:
        if len(c) < 5:
            raise GridTooCoarse(f"need at least 5 grid points for differences, got {len(c)}")
        h = np.diff(c.grid)
        if np.ptp(h) > 1e-9 * h.mean():
            raise GridTooCoarse("finite differences need a uniform grid")
        h = h.mean()
        y = c.values
        d1 = (y[2:] - y[:-2]) / (2.0 * h)
        d2 = (y[2:] - 2.0 * y[1:-1] + y[:-2]) / (h * h)
    return float(np.max(np.abs(d2 + coeff * d1 * (1.0 + d1))))


def bose_ode_residual(p: BoseCurveParams, grid_points: int = DEFAULT_GRID) -> float:
    """``max |L'' - c_bar (1 - L'^2)|`` with both derivatives from central differences of ``L``."""
    if grid_points < 5:
        raise GridTooCoarse(f"need at least 5 grid points for differences, got {grid_points}")
    t = np.linspace(0.0, 1.0, grid_points)
    h = t[1] - t[0]
    L = np.asarray(bose_L(t, p))
    lp = (L[2:] - L[:-2]) / (2.0 * h)
    lpp = (L[2:] - 2.0 * L[1:-1] + L[:-2]) / (h * h)
    return float(np.max(np.abs(lpp - p.c_bar * (1.0 - lp * lp))))


def identify_curves(rho: float, m: float, grid_points: int = DEFAULT_GRID, tol: float = DEFAULT_TOL) -> float:
    """Sup distance between the limit curve at ``(rho, m)`` and the matching rescaled Fermi curve."""
    p = invert(MacroState(rho, m), tol=tol).params
    psi = limit_curve(p, grid_points)
    fermi = rotate_to_fermi(BoseCurveParams(rho, -p.b), grid_points)
    scaled = gamma_scale(fermi, 1.0 / SQRT2)
    shifted = scaled.shifted(-1.0)
    # undo rounding in sqrt2 / (1/sqrt2) - 1 so both live on exactly [-1, 1]
    grid = shifted.grid.copy()
    grid[0], grid[-1] = -1.0, 1.0
    shifted = Curve(grid, shifted.values, d1=shifted.d1, d2=shifted.d2)
    return sup_distance(psi, shifted)

"""Grand-canonical profile beta(x; a, b), its moments F and G, and the dilogarithm.

The profile is the logistic curve ``beta(x) = expit(b*x + logit(a))``.
Internally everything is parametrized by ``theta = logit(a)`` so that
profiles with ``a`` extremely close to 0 or 1 (large tilts) keep full
relative precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import expit

from .errors import DomainError, OutOfDomain

PI2_6 = math.pi**2 / 6.0

# below this |b| the closed forms lose digits to 1/b and 1/b^2 cancellation
SERIES_RADIUS = 0.5
_SERIES_TERMS = 32


@dataclass(frozen=True)
class ProfileParams:
    """Parameters (a, b) of the profile; ``logit`` is cached, not compared."""

    a: float
    b: float
    logit: float = field(default=float("nan"), compare=False, repr=False)

    def __post_init__(self) -> None:
        if not (0.0 < self.a < 1.0) and math.isnan(self.logit):
            raise DomainError(f"a must lie in (0, 1), got {self.a}")
        if not math.isfinite(self.b):
            raise DomainError(f"b must be finite, got {self.b}")
        if math.isnan(self.logit):
            object.__setattr__(self, "logit", math.log(self.a) - math.log1p(-self.a))

    @classmethod
    def from_logit(cls, theta: float, b: float) -> "ProfileParams":
        if not math.isfinite(theta):
            raise DomainError(f"logit(a) must be finite, got {theta}")
        return cls(float(expit(theta)), float(b), float(theta))


@dataclass(frozen=True)
class MacroState:
    """Macroscopic density ``rho`` and first moment ``m``."""

    rho: float
    m: float

    def __post_init__(self) -> None:
        if not (0.0 < self.rho < 1.0):
            raise OutOfDomain(f"rho must lie in (0, 1), got {self.rho}")
        if not abs(self.m) < self.v / 2:
            raise OutOfDomain(f"|m| = {abs(self.m)} must be below v/2 = {self.v / 2}")

    @property
    def v(self) -> float:
        return self.rho * (1.0 - self.rho)


def beta(x, p: ProfileParams):
    """Profile value at ``x`` (scalar or array); logistic form, overflow safe."""
    out = expit(p.b * np.asarray(x, dtype=float) + p.logit)
    return float(out) if np.ndim(out) == 0 else out


def beta_prime(x, p: ProfileParams):
    """Derivative of the profile in ``x``: ``b * beta * (1 - beta)``."""
    y = p.b * np.asarray(x, dtype=float) + p.logit
    out = p.b * expit(y) * expit(-y)
    return float(out) if np.ndim(out) == 0 else out


def log_g(x, p: ProfileParams):
    """``log g(x) = log(a e^{bx} + 1 - a)`` without overflow."""
    y = p.b * np.asarray(x, dtype=float) + p.logit
    # log(1-a) = -softplus(logit a) keeps precision when a rounds to 1
    out = np.logaddexp(0.0, y) - np.logaddexp(0.0, p.logit)
    return float(out) if np.ndim(out) == 0 else out


# --- dilogarithm -----------------------------------------------------------


def _dilog_series(z: float) -> float:
    total = 0.0
    term_pow = z
    k = 1
    while True:
        term = term_pow / (k * k)
        total += term
        if abs(term) <= 1e-18 * abs(total) or k > 200:
            return total
        k += 1
        term_pow *= z


def dilog(z: float) -> float:
    """Euler dilogarithm ``-int_0^z log(1-t)/t dt`` for real ``z <= 1``."""
    z = float(z)
    if z > 1.0 or math.isnan(z):
        raise DomainError(f"dilog is real only for z <= 1, got {z}")
    if z == 1.0:
        return PI2_6
    if z > 0.5:
        return PI2_6 - math.log(z) * math.log1p(-z) - _dilog_series(1.0 - z)
    if z >= -0.5:
        return _dilog_series(z)
    if z >= -1.0:
        # Landen: z/(z-1) lands in [1/3, 1/2)
        return -_dilog_series(z / (z - 1.0)) - 0.5 * math.log1p(-z) ** 2
    return -dilog(1.0 / z) - PI2_6 - 0.5 * math.log(-z) ** 2


def dilog_negexp(s: float) -> float:
    """``dilog(-exp(s))`` for any real ``s``, never forming ``exp(s)`` when large."""
    if s > 0.0:
        return -dilog(-math.exp(-s)) - PI2_6 - 0.5 * s * s
    return dilog(-math.exp(s))


# --- moments F, G and their partial derivatives ------------------------------


@lru_cache(maxsize=1)
def _logistic_derivative_polys() -> list[np.ndarray]:
    # n-th derivative of expit is a polynomial P_n(s) in s = expit(theta);
    # P_{n+1} = P_n'(s) * s * (1 - s)
    polys = [np.array([0.0, 1.0])]
    s_one_minus_s = np.array([0.0, 1.0, -1.0])
    for _ in range(_SERIES_TERMS + 1):
        d = np.polynomial.polynomial.polyder(polys[-1])
        polys.append(np.polynomial.polynomial.polymul(d, s_one_minus_s))
    return polys


def _logistic_derivatives(theta: float) -> np.ndarray:
    s = float(expit(theta))
    return np.array(
        [np.polynomial.polynomial.polyval(s, c) for c in _logistic_derivative_polys()]
    )


def _jet_series(theta: float, b: float) -> tuple[float, ...]:
    d = _logistic_derivatives(theta)
    F = G = F_t = G_t = F_b = G_b = 0.0
    fact = 1.0
    for n in range(_SERIES_TERMS):
        if n:
            fact *= n
        bn = b**n
        bn1 = b ** (n - 1) if n else 0.0
        if n % 2 == 0:
            w = 1.0 / (fact * (n + 1))
            F += d[n] * bn * w
            F_t += d[n + 1] * bn * w
            F_b += d[n] * n * bn1 * w
        else:
            w = 1.0 / (2.0 * fact * (n + 2))
            G += d[n] * bn * w
            G_t += d[n + 1] * bn * w
            G_b += d[n] * n * bn1 * w
    return F, G, F_t, F_b, G_t, G_b


def _jet_closed(theta: float, b: float) -> tuple[float, ...]:
    sp_plus = float(np.logaddexp(0.0, theta + b))
    sp_minus = float(np.logaddexp(0.0, theta - b))
    F = (sp_plus - sp_minus) / (2.0 * b)
    dil = dilog_negexp(theta + b) - dilog_negexp(theta - b)
    G = 0.25 * ((sp_plus + sp_minus) / b + dil / (b * b))
    b_hi = float(expit(theta + b))
    b_lo = float(expit(theta - b))
    F_t = (b_hi - b_lo) / (2.0 * b)
    F_b = (b_hi + b_lo - 2.0 * F) / (2.0 * b)
    G_t = (b_hi + b_lo - 2.0 * F) / (4.0 * b)
    G_b = (b_hi - b_lo - 8.0 * G) / (4.0 * b)
    return F, G, F_t, F_b, G_t, G_b


def moment_jet(p: ProfileParams) -> tuple[float, float, float, float, float, float]:
    """Return ``(F, G, dF/dtheta, dF/db, dG/dtheta, dG/db)`` with ``theta = logit(a)``."""
    if abs(p.b) < SERIES_RADIUS:
        return _jet_series(p.logit, p.b)
    return _jet_closed(p.logit, p.b)


def F(p: ProfileParams) -> float:
    """Half the integral of the profile over [-1, 1]: the density coordinate."""
    if p.b == 0.0:
        return p.a
    return moment_jet(p)[0]


def G(p: ProfileParams) -> float:
    """A quarter of the first moment of the profile: the tilt coordinate."""
    if p.b == 0.0:
        return 0.0
    return moment_jet(p)[1]


def phi(p: ProfileParams) -> MacroState:
    """The forward map (a, b) -> (rho, m)."""
    return MacroState(F(p), G(p))


def beta_integral(x, p: ProfileParams):
    """``int_x^1 beta(y) dy``, i.e. ``(log g(1) - log g(x)) / b``."""
    x = np.asarray(x, dtype=float)
    if p.b == 0.0:
        out = p.a * (1.0 - x)
    elif abs(p.b) < SERIES_RADIUS:
        d = _logistic_derivatives(p.logit)
        out = np.zeros_like(x)
        fact = 1.0
        for n in range(_SERIES_TERMS):
            fact *= n + 1
            out = out + d[n] * p.b**n * (1.0 - x ** (n + 1)) / fact
    else:
        y1 = p.b + p.logit
        out = (np.logaddexp(0.0, y1) - np.logaddexp(0.0, p.b * x + p.logit)) / p.b
    return float(out) if out.ndim == 0 else out

"""Joint law of ``S_n = sum X_k`` and ``T_n = sum k X_k`` over the non-defect sites.

The exact table comes from a DP over sites; the Gaussian surrogate ``q0``
and the characteristic function serve as the two independent views used
to check the local limit theorem.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import CapExceeded, DegenerateCorrelation
from .profile import ProfileParams, beta
from .quadrature import integrate

PMF_CAP = 250
DEFECT_CAP = 8


@dataclass(frozen=True, eq=False)
class WeightedSumModel:
    """Independent Bernoulli ``X_1..X_n`` with means ``alpha``, minus the sites in ``defects``.

    ``alpha_bounds`` are the closed bounds ``(alpha_-, alpha_+)`` every mean
    must respect; ``profile_fn`` optionally records the macroscopic
    ``alpha(x)`` on [0, 1] the means were sampled from.
    """

    n: int
    alpha: np.ndarray
    defects: frozenset = frozenset()
    alpha_bounds: tuple[float, float] = (1e-12, 1.0 - 1e-12)
    defect_cap: int = DEFECT_CAP
    profile_fn: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, repr=False)

    def __post_init__(self) -> None:
        alpha = np.array(self.alpha, dtype=float).reshape(-1)
        if self.n < 1 or alpha.shape != (self.n,):
            raise ValueError(f"need n >= 1 means, got n={self.n} and {alpha.shape[0]} values")
        lo, hi = self.alpha_bounds
        if not (0.0 < lo <= hi < 1.0):
            raise ValueError(f"alpha bounds must satisfy 0 < lo <= hi < 1, got {self.alpha_bounds}")
        if np.any(alpha < lo) or np.any(alpha > hi):
            raise ValueError(f"means must lie in [{lo}, {hi}]")
        defects = frozenset(int(k) for k in self.defects)
        if any(not 1 <= k <= self.n for k in defects):
            raise ValueError("defects must be a subset of 1..n")
        if len(defects) > self.defect_cap:
            raise ValueError(f"at most {self.defect_cap} defects allowed, got {len(defects)}")
        alpha.setflags(write=False)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "defects", defects)

    @classmethod
    def from_function(
        cls, n: int, fn: Callable[[np.ndarray], np.ndarray], defects=frozenset(), **kw
    ) -> "WeightedSumModel":
        """Means ``alpha_k = fn(k / n)``."""
        ks = np.arange(1, n + 1)
        return cls(n, np.asarray(fn(ks / n), dtype=float), frozenset(defects), profile_fn=fn, **kw)

    @classmethod
    def constant(cls, n: int, value: float, defects=frozenset(), **kw) -> "WeightedSumModel":
        return cls.from_function(n, lambda x: np.full_like(x, value, dtype=float), defects, **kw)

    @classmethod
    def from_profile(cls, n: int, p: ProfileParams, defects=frozenset(), **kw) -> "WeightedSumModel":
        """Means ``alpha(x) = beta(2x - 1; a, b)`` on [0, 1]."""
        return cls.from_function(n, lambda x: beta(2.0 * x - 1.0, p), defects, **kw)

    @property
    def active(self) -> np.ndarray:
        """Sorted sites ``1..n`` outside the defect set."""
        ks = np.arange(1, self.n + 1)
        return ks[~np.isin(ks, list(self.defects))] if self.defects else ks


@dataclass(frozen=True)
class MomentSummary:
    E: float
    F: float
    U: float
    V: float
    lam: float

    @property
    def degenerate(self) -> bool:
        return not self.lam**2 < 1.0


def moments(model: WeightedSumModel) -> MomentSummary:
    """Means, variances and the finite-n correlation of ``(S_n, T_n)``."""
    ks = model.active.astype(float)
    a = model.alpha[model.active - 1]
    v = a * (1.0 - a)
    E = math.fsum(a)
    F = math.fsum(ks * a)
    U = math.fsum(v)
    V = math.fsum(ks * ks * v)
    lam = math.fsum(ks * v) / math.sqrt(U * V)
    return MomentSummary(E, F, U, V, lam)


def limit_constants(alpha_fn: Callable[[np.ndarray], np.ndarray]) -> dict[str, float]:
    """The n -> infinity constants of a profile ``alpha`` on [0, 1].

    Keys: ``alpha_bar``, ``alpha_check``, ``v_bar``, ``v_check`` and the
    limiting correlation ``lam``.
    """

    def var(x):
        a = np.asarray(alpha_fn(x), dtype=float)
        return a * (1.0 - a)

    out = {
        "alpha_bar": integrate(alpha_fn, 0.0, 1.0),
        "alpha_check": integrate(lambda x: x * alpha_fn(x), 0.0, 1.0),
        "v_bar": integrate(var, 0.0, 1.0),
        "v_check": integrate(lambda x: x * x * var(x), 0.0, 1.0),
    }
    out["lam"] = integrate(lambda x: x * var(x), 0.0, 1.0) / math.sqrt(out["v_bar"] * out["v_check"])
    return out


@dataclass(frozen=True, eq=False)
class JointPMF:
    """Dense table ``table[K, L] = P(S_n = K, T_n = L)`` with its exact support mask."""

    n: int
    table: np.ndarray
    support: np.ndarray
    defects: frozenset = frozenset()

    @property
    def k_max(self) -> int:
        return self.table.shape[0] - 1

    @property
    def l_max(self) -> int:
        return self.table.shape[1] - 1

    def prob(self, K: int, L: int) -> float:
        if 0 <= K <= self.k_max and 0 <= L <= self.l_max:
            return float(self.table[K, L])
        return 0.0

    def mass(self) -> float:
        return math.fsum(self.table.ravel())

    def marginal_S(self) -> np.ndarray:
        return np.array([math.fsum(row) for row in self.table])

    def marginal_T(self) -> np.ndarray:
        return self.table.sum(axis=0)


def exact_pmf(
    model: WeightedSumModel,
    cap: Optional[int] = PMF_CAP,
    k_max: Optional[int] = None,
    l_max: Optional[int] = None,
) -> JointPMF:
    """Joint PMF of ``(S_n, T_n)`` by DP over the non-defect sites in ascending order.

    ``k_max``/``l_max`` truncate the table; entries inside the truncated
    range are unaffected since the DP only moves mass to larger indices.
    """
    if cap is not None and model.n > cap:
        raise CapExceeded(f"exact PMF is capped at n={cap}, got n={model.n}")
    active = model.active
    kdim = len(active) + 1 if k_max is None else min(k_max, len(active)) + 1
    full_l = int(active.sum())
    ldim = full_l + 1 if l_max is None else min(l_max, full_l) + 1
    P = np.zeros((kdim, ldim))
    S = np.zeros((kdim, ldim), dtype=bool)
    P[0, 0] = 1.0
    S[0, 0] = True
    r = c = 0  # occupied extent of the table so far
    for k in active:
        k = int(k)
        a = model.alpha[k - 1]
        r_src = min(r, kdim - 2)
        c_src = min(c, ldim - 1 - k)
        if r_src >= 0 and c_src >= 0:
            moved = a * P[: r_src + 1, : c_src + 1]
            moved_s = S[: r_src + 1, : c_src + 1].copy()
        else:
            moved = None
        P[: r + 1, : c + 1] *= 1.0 - a
        if moved is not None:
            P[1 : r_src + 2, k : k + c_src + 1] += moved
            S[1 : r_src + 2, k : k + c_src + 1] |= moved_s
        r = min(r + 1, kdim - 1)
        c = min(c + k, ldim - 1)
    return JointPMF(model.n, P, S, model.defects)


def gaussian_q0(y1, y2, lam: float):
    """Standard bivariate normal density with correlation ``lam``."""
    if not lam * lam < 1.0:
        raise DegenerateCorrelation(f"|lambda| = {abs(lam)} must be below 1")
    y1 = np.asarray(y1, dtype=float)
    y2 = np.asarray(y2, dtype=float)
    det = 1.0 - lam * lam
    out = np.exp(-(y1 * y1 - 2.0 * lam * y1 * y2 + y2 * y2) / (2.0 * det)) / (
        2.0 * math.pi * math.sqrt(det)
    )
    return float(out) if out.ndim == 0 else out


def local_errors(model: WeightedSumModel, pmf: Optional[JointPMF] = None, lam: Optional[float] = None):
    """``sqrt(U V) P(K, L) - q0(y1, y2)`` on the whole table, NaN off the support."""
    if pmf is None:
        pmf = exact_pmf(model)
    mom = moments(model)
    if lam is None:
        lam = mom.lam
    K = np.arange(pmf.k_max + 1)
    L = np.arange(pmf.l_max + 1)
    y1 = (K - mom.E) / math.sqrt(mom.U)
    y2 = (L - mom.F) / math.sqrt(mom.V)
    err = math.sqrt(mom.U * mom.V) * pmf.table - gaussian_q0(y1[:, None], y2[None, :], lam)
    return np.where(pmf.support, err, np.nan)


def sup_error(
    model: WeightedSumModel,
    pmf: Optional[JointPMF] = None,
    use_limit_lambda: bool = False,
) -> float:
    """Largest local-limit error over the support of ``(S_n, T_n)``.

    By default ``q0`` uses the finite-n correlation; ``use_limit_lambda``
    switches to the limit integral of ``model.profile_fn``.
    """
    lam = None
    if use_limit_lambda:
        if model.profile_fn is None:
            raise ValueError("limit correlation needs model.profile_fn")
        lam = limit_constants(model.profile_fn)["lam"]
    return float(np.nanmax(np.abs(local_errors(model, pmf, lam))))


def char_fn(model: WeightedSumModel, s, t):
    """``E exp(i(s S_n + t T_n))`` as a product over the non-defect sites."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    out = np.ones(np.broadcast(s, t).shape, dtype=complex)
    for k in model.active:
        a = model.alpha[k - 1]
        out *= a * np.exp(1j * (s + k * t)) + (1.0 - a)
    return complex(out) if out.ndim == 0 else out


def fourier_pmf(model: WeightedSumModel) -> np.ndarray:
    """PMF table recovered from the characteristic function on a periodic grid.

    The trapezoidal rule on ``[-pi, pi]^2`` with at least as many nodes as
    support points per axis is exact for this trigonometric polynomial, so
    the only error is rounding.
    """
    active = model.active
    n1 = len(active) + 1
    n2 = int(active.sum()) + 1
    s = 2.0 * math.pi * np.arange(n1) / n1
    t = 2.0 * math.pi * np.arange(n2) / n2
    f = char_fn(model, s[:, None], t[None, :])
    return np.fft.fft2(f).real / (n1 * n2)


def log_log_slope(ns, errors) -> float:
    """Least-squares slope of ``log error`` against ``log n``."""
    return float(np.polyfit(np.log(np.asarray(ns, float)), np.log(np.asarray(errors, float)), 1)[0])

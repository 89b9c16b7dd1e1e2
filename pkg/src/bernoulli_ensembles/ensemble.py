"""Canonical ensemble on the window {-ell, ..., ell}: counting, sampling, marginals.

Sites are re-indexed as ``j = k + ell + 1`` in ``1..n`` (``n = 2 ell + 1``),
which turns the weighted sum into ``T = M + (ell + 1) K >= 0``. Counting
then means counting ``K``-subsets of ``{1..n}`` with element sum ``T``.

Exact counts use the generating function ``prod_j (1 + z q^j)``. For each
power of ``z`` the polynomial in ``q`` is packed into one Python integer,
``bits`` bits per coefficient, so a DP step over a site is a single
shift-and-add on big integers.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Sequence, Union

import numpy as np
from numba import njit

from .errors import CapExceeded, InfeasibleConstraint
from .inversion import invert
from .profile import MacroState, ProfileParams, beta

EXACT_CAP = 80
MAX_FORCED_SITES = 4


@dataclass(frozen=True)
class CanonicalSpec:
    """Window ``Lambda_ell`` with particle number ``K`` and weighted sum ``M``."""

    ell: int
    K: int
    M: int

    def __post_init__(self) -> None:
        if int(self.ell) != self.ell or self.ell < 1:
            raise ValueError(f"ell must be a positive integer, got {self.ell}")
        object.__setattr__(self, "ell", int(self.ell))
        object.__setattr__(self, "K", int(self.K))
        object.__setattr__(self, "M", int(self.M))

    @property
    def n(self) -> int:
        return 2 * self.ell + 1

    @property
    def T(self) -> int:
        """Weighted sum in the shifted indexing, ``M + (ell + 1) K``."""
        return self.M + (self.ell + 1) * self.K

    @property
    def feasible(self) -> bool:
        n = self.n
        return 0 <= self.K <= n and 2 * abs(self.M) <= self.K * n - self.K**2

    @property
    def rho(self) -> float:
        return self.K / self.n

    @property
    def m(self) -> float:
        return self.M / self.n**2

    @classmethod
    def from_macro(cls, ell: int, rho: float, m: float) -> "CanonicalSpec":
        """Nearest-integer (K, M) for (rho, m), clamped to the feasible range."""
        n = 2 * ell + 1
        K = min(max(round(rho * n), 0), n)
        M = round(m * n * n)
        bound = (K * n - K * K) // 2
        return cls(ell, K, max(-bound, min(bound, M)))


@dataclass(frozen=True)
class ParticleConfig:
    ell: int
    occupancy: tuple[int, ...]

    def __post_init__(self) -> None:
        occ = tuple(int(x) for x in self.occupancy)
        if len(occ) != 2 * self.ell + 1:
            raise ValueError(f"occupancy must have length {2 * self.ell + 1}, got {len(occ)}")
        if any(x not in (0, 1) for x in occ):
            raise ValueError("occupancy entries must be 0 or 1")
        object.__setattr__(self, "occupancy", occ)

    @property
    def sites(self) -> range:
        return range(-self.ell, self.ell + 1)

    @property
    def K(self) -> int:
        return sum(self.occupancy)

    @property
    def M(self) -> int:
        return sum(k * x for k, x in zip(self.sites, self.occupancy))

    def __getitem__(self, k: int) -> int:
        if not -self.ell <= k <= self.ell:
            raise IndexError(k)
        return self.occupancy[k + self.ell]

    def to_dict(self) -> dict:
        return {"ell": self.ell, "K": self.K, "M": self.M, "occupancy": list(self.occupancy)}

    @classmethod
    def from_dict(cls, d: dict) -> "ParticleConfig":
        c = cls(int(d["ell"]), tuple(d["occupancy"]))
        if ("K" in d and d["K"] != c.K) or ("M" in d and d["M"] != c.M):
            raise ValueError("stored K/M disagree with occupancy")
        return c


# --- packed generating functions ---------------------------------------------


def _bits(n: int) -> int:
    # every count is at most C(n, k) < 2**(n + 1)
    return n + 1


def _coef(poly: int, t: int, bits: int) -> int:
    if t < 0:
        return 0
    return (poly >> (bits * t)) & ((1 << bits) - 1)


def _subset_gf(weights: Iterable[int], kmax: int, tmax: int, bits: int) -> list[int]:
    """Packed ``[z^k] prod_w (1 + z q^w)`` for ``k <= kmax``, degree truncated at ``tmax``."""
    mask = (1 << (bits * (tmax + 1))) - 1
    P = [1] + [0] * kmax
    top = 0
    for w in weights:
        shift = bits * w
        top = min(top + 1, kmax)
        for k in range(top, 0, -1):
            if P[k - 1]:
                P[k] = (P[k] + (P[k - 1] << shift)) & mask
    return P


def _divide_site(P: Sequence[int], w: int, bits: int, mask: int) -> list[int]:
    """Remove the factor ``(1 + z q^w)`` from a packed generating function."""
    out = [P[0]]
    shift = bits * w
    for k in range(1, len(P)):
        out.append(P[k] - ((out[k - 1] << shift) & mask))
    return out


@lru_cache(maxsize=16)
def _spec_gf(spec: CanonicalSpec) -> tuple[int, ...]:
    return tuple(_subset_gf(range(1, spec.n + 1), spec.K, spec.T, _bits(spec.n)))


def count(spec: CanonicalSpec) -> int:
    """Number of configurations in the window with the prescribed K and M."""
    if not spec.feasible:
        return 0
    return _coef(_spec_gf(spec)[spec.K], spec.T, _bits(spec.n))


class CountTable:
    """Exact counts for every (K, M) on a window, from one full DP.

    ``table[K][T]`` is the number of ``K``-subsets of ``{1..n}`` with sum
    ``T``; the shifted weight ``T = M + (ell + 1) K`` runs over
    ``0..n(n+1)/2``.
    """

    def __init__(self, ell: int):
        self.ell = ell
        self.n = n = 2 * ell + 1
        self.t_max = n * (n + 1) // 2
        self.bits = _bits(n)
        self._polys = _subset_gf(range(1, n + 1), n, self.t_max, self.bits)

    def count(self, K: int, M: int) -> int:
        if not 0 <= K <= self.n:
            return 0
        T = M + (self.ell + 1) * K
        if not 0 <= T <= self.t_max:
            return 0
        return _coef(self._polys[K], T, self.bits)

    def row(self, K: int) -> list[int]:
        """Counts for particle number ``K`` indexed by shifted weight ``T``."""
        return [_coef(self._polys[K], t, self.bits) for t in range(self.t_max + 1)]

    def total(self) -> int:
        return sum(sum(self.row(K)) for K in range(self.n + 1))


# --- exact sampling ------------------------------------------------------------


class _PrefixCounts:
    """Windowed counts ``N(m, k, t)`` of ``k``-subsets of ``{1..m}`` with sum ``t``.

    Only states consistent with completing to ``(K, T)`` on ``{m+1..n}``
    are stored.
    """

    def __init__(self, spec: CanonicalSpec):
        n, K, T = spec.n, spec.K, spec.T
        self.bits = bits = _bits(n)
        mask = (1 << (bits * (T + 1))) - 1
        P = [1] + [0] * K
        self.levels: list[dict[int, tuple[int, int, int]]] = [self._window(P, 0, n, K, T)]
        for m in range(1, n + 1):
            shift = bits * m
            for k in range(min(m, K), 0, -1):
                if P[k - 1]:
                    P[k] = (P[k] + (P[k - 1] << shift)) & mask
            self.levels.append(self._window(P, m, n, K, T))

    def _window(self, P, m, n, K, T):
        bits = self.bits
        level = {}
        for k in range(max(0, K - (n - m)), min(m, K) + 1):
            r = K - k
            lo = max(k * (k + 1) // 2, T - (r * n - r * (r - 1) // 2))
            hi = min(k * (2 * m - k + 1) // 2, T - (r * m + r * (r + 1) // 2))
            if lo > hi:
                continue
            width = hi - lo + 1
            level[k] = (lo, hi, (P[k] >> (bits * lo)) & ((1 << (bits * width)) - 1))
        return level

    def __call__(self, m: int, k: int, t: int) -> int:
        entry = self.levels[m].get(k)
        if entry is None:
            return 0
        lo, hi, poly = entry
        if not lo <= t <= hi:
            return 0
        return _coef(poly, t - lo, self.bits)


@lru_cache(maxsize=4)
def _prefix_counts(spec: CanonicalSpec) -> _PrefixCounts:
    return _PrefixCounts(spec)


def _check_samplable(spec: CanonicalSpec) -> None:
    if not spec.feasible:
        raise InfeasibleConstraint(f"no configuration with K={spec.K}, M={spec.M} on ell={spec.ell}")


def exact_occupancy(spec: CanonicalSpec, seed: int, count: int, cap: int = EXACT_CAP) -> np.ndarray:
    """``count`` exactly uniform samples as a ``(count, n)`` uint8 array."""
    _check_samplable(spec)
    if spec.ell > cap:
        raise CapExceeded(f"exact sampler is capped at ell={cap}; use the MCMC sampler")
    N = _prefix_counts(spec)
    rng = random.Random(seed)
    out = np.zeros((count, spec.n), dtype=np.uint8)
    for s in range(count):
        k, t = spec.K, spec.T
        for m in range(spec.n, 0, -1):
            if k == 0:
                break
            total = N(m, k, t)
            take = N(m - 1, k - 1, t - m)
            if rng.randrange(total) < take:
                out[s, m - 1] = 1
                k -= 1
                t -= m
    return out


def sample_exact(spec: CanonicalSpec, seed: int, count: int, cap: int = EXACT_CAP) -> list[ParticleConfig]:
    """I.i.d. uniform configurations by site-by-site conditioning on exact counts."""
    return [ParticleConfig(spec.ell, tuple(row)) for row in exact_occupancy(spec, seed, count, cap)]


# --- MCMC ----------------------------------------------------------------------


@njit(cache=True, nogil=True)
def _mcmc_kernel(occ, pos, r1, r2):
    n = occ.shape[0]
    accepted = 0
    for s in range(r1.shape[0]):
        i = r1[s]
        j = r2[s]
        if j >= i:
            j += 1
        p = pos[i]
        q = pos[j]
        # particle at p steps right, particle at q steps left: K and M unchanged
        if p + 1 < n and q >= 1 and occ[p + 1] == 0 and occ[q - 1] == 0 and p + 1 != q - 1:
            occ[p] = 0
            occ[p + 1] = 1
            occ[q] = 0
            occ[q - 1] = 1
            pos[i] = p + 1
            pos[j] = q - 1
            accepted += 1
    return accepted


def staircase(spec: CanonicalSpec) -> np.ndarray:
    """Deterministic start: pack left, then push the rightmost particles right until M is met."""
    _check_samplable(spec)
    n, K = spec.n, spec.K
    pos = list(range(K))
    deficit = spec.T - K * (K + 1) // 2
    for r in range(K - 1, -1, -1):
        room = (n - K + r) - pos[r]
        step = min(room, deficit)
        pos[r] += step
        deficit -= step
        if deficit == 0:
            break
    occ = np.zeros(n, dtype=np.uint8)
    occ[pos] = 1
    return occ


def mcmc_occupancy(
    spec: CanonicalSpec,
    seed: int,
    sweeps: int,
    count: int,
    burn_in: int | None = None,
    thin: int | None = None,
) -> np.ndarray:
    """Samples from the pair-move chain as a ``(count, n)`` uint8 array.

    One sweep is ``n`` proposals. ``burn_in`` defaults to ``sweeps // 2``
    and ``thin`` (sweeps between recorded samples) to 1.
    """
    _check_samplable(spec)
    n, K = spec.n, spec.K
    occ = staircase(spec)
    out = np.empty((count, n), dtype=np.uint8)
    if K < 2 or K > n - 2:
        # the class has a single element
        out[:] = occ
        return out
    if burn_in is None:
        burn_in = sweeps // 2
    if thin is None:
        thin = 1
    pos = np.flatnonzero(occ).astype(np.int64)
    rng = np.random.default_rng(seed)

    def run(n_sweeps: int) -> None:
        todo = n_sweeps * n
        chunk = 1 << 20
        while todo > 0:
            size = min(todo, chunk)
            r1 = rng.integers(0, K, size=size)
            r2 = rng.integers(0, K - 1, size=size)
            _mcmc_kernel(occ, pos, r1, r2)
            todo -= size

    run(burn_in)
    for s in range(count):
        run(thin)
        out[s] = occ
    return out


def sample_mcmc(
    spec: CanonicalSpec,
    seed: int,
    sweeps: int,
    count: int,
    burn_in: int | None = None,
    thin: int | None = None,
) -> list[ParticleConfig]:
    """Configurations from a Markov chain whose stationary law is uniform on the class."""
    arr = mcmc_occupancy(spec, seed, sweeps, count, burn_in, thin)
    return [ParticleConfig(spec.ell, tuple(row)) for row in arr]


# --- marginals -----------------------------------------------------------------


def _normalize_constraints(spec: CanonicalSpec, sites) -> dict[int, int]:
    forced: dict[int, int] = {}
    for k, bit in sites:
        if not -spec.ell <= k <= spec.ell:
            raise ValueError(f"site {k} outside the window")
        if bit not in (0, 1):
            raise ValueError("bits must be 0 or 1")
        if forced.get(k, bit) != bit:
            raise InfeasibleConstraint(f"site {k} forced to both 0 and 1")
        forced[k] = bit
    if len(forced) > MAX_FORCED_SITES:
        raise ValueError(f"at most {MAX_FORCED_SITES} forced sites are supported")
    return forced


def forced_count(spec: CanonicalSpec, forced: dict[int, int]) -> int:
    """Number of configurations of the class agreeing with ``forced`` (site -> bit)."""
    if not spec.feasible:
        return 0
    bits = _bits(spec.n)
    mask = (1 << (bits * (spec.T + 1))) - 1
    P = list(_spec_gf(spec))
    k, t = spec.K, spec.T
    for site, bit in forced.items():
        w = site + spec.ell + 1
        P = _divide_site(P, w, bits, mask)
        if bit:
            k -= 1
            t -= w
    if k < 0 or t < 0:
        return 0
    return _coef(P[k], t, bits)


def exact_marginal(spec: CanonicalSpec, sites, cap: int = EXACT_CAP) -> Union[Fraction, float]:
    """Probability under the uniform measure that the given sites carry the given bits.

    ``sites`` is an iterable of ``(site, bit)`` pairs. Returns an exact
    ``Fraction`` up to ``ell = cap``; beyond, a float from the tilted
    floating-point DP.
    """
    if not spec.feasible:
        raise InfeasibleConstraint(f"no configuration with K={spec.K}, M={spec.M} on ell={spec.ell}")
    forced = _normalize_constraints(spec, sites)
    if spec.ell > cap:
        return _tilted_marginal(spec, forced)
    return Fraction(forced_count(spec, forced), count(spec))


def one_point_marginals(spec: CanonicalSpec) -> np.ndarray:
    """``E[eta_k]`` for every site ``k = -ell..ell``, exact counts rounded to float."""
    if not spec.feasible:
        raise InfeasibleConstraint(f"no configuration with K={spec.K}, M={spec.M} on ell={spec.ell}")
    total = count(spec)
    if spec.K == 0:
        return np.zeros(spec.n)
    bits = _bits(spec.n)
    mask = (1 << (bits * (spec.T + 1))) - 1
    P = _spec_gf(spec)
    out = np.empty(spec.n)
    for w in range(1, spec.n + 1):
        Q = _divide_site(P, w, bits, mask)
        out[w - 1] = float(Fraction(_coef(Q[spec.K - 1], spec.T - w, bits), total))
    return out


def finite_profile(spec: CanonicalSpec) -> ProfileParams:
    """Profile solving the moment equations at the realized (K/n, M/n^2)."""
    return invert(MacroState(spec.rho, spec.m)).params


def _tilted_marginal(spec: CanonicalSpec, forced: dict[int, int]) -> float:
    # the conditional law does not depend on the tilt, so use the one that
    # makes (K, T) typical and keeps every probability far from underflow
    from .llt import WeightedSumModel, exact_pmf

    p = finite_profile(spec)
    ks = np.arange(1, spec.n + 1)
    alpha = beta((ks - spec.ell - 1) / spec.ell, p)
    full = WeightedSumModel(spec.n, alpha)
    denom = exact_pmf(full, cap=None, k_max=spec.K, l_max=spec.T).prob(spec.K, spec.T)
    defects = frozenset(k + spec.ell + 1 for k in forced)
    k, t, weight = spec.K, spec.T, 1.0
    for site, bit in forced.items():
        w = site + spec.ell + 1
        weight *= alpha[w - 1] if bit else 1.0 - alpha[w - 1]
        if bit:
            k -= 1
            t -= w
    if k < 0 or t < 0:
        return 0.0
    reduced = WeightedSumModel(spec.n, alpha, defects)
    num = exact_pmf(reduced, cap=None, k_max=k, l_max=t).prob(k, t)
    return weight * num / denom


# --- Uniformity checks --------------------------------------------------------


def one_point_deviation(spec: CanonicalSpec) -> float:
    """``max_k |E[eta_k] - beta_ell(k/ell)|`` with the finite-size profile."""
    p = finite_profile(spec)
    ks = np.arange(-spec.ell, spec.ell + 1)
    return float(np.max(np.abs(one_point_marginals(spec) - beta(ks / spec.ell, p))))


def pair_covariance(spec: CanonicalSpec, j: int, k: int) -> float:
    """``E[eta_j eta_k] - E[eta_j] E[eta_k]`` from forced-site counts."""
    both = exact_marginal(spec, [(j, 1), (k, 1)])
    return float(both - exact_marginal(spec, [(j, 1)]) * exact_marginal(spec, [(k, 1)]))


ProfileLike = Union[ProfileParams, Callable[[np.ndarray], np.ndarray]]


def verify_class_uniformity(ell: int, profile: ProfileLike) -> float:
    """Largest spread of conditional probabilities within any (K, M) class.

    Enumerates all ``2^(2 ell + 1)`` configurations under independent
    Bernoulli variables with means ``profile(k/ell)`` and, for each class,
    returns ``max - min`` of the probabilities conditioned on the class.
    Zero up to rounding exactly when the conditional law is uniform.
    """
    if ell > 4:
        raise CapExceeded("exhaustive enumeration is limited to ell <= 4")
    n = 2 * ell + 1
    ks = np.arange(-ell, ell + 1)
    if isinstance(profile, ProfileParams):
        alpha = np.asarray(beta(ks / ell, profile), dtype=float)
    else:
        alpha = np.asarray(profile(ks / ell), dtype=float)
    configs = np.array(list(itertools.product((0, 1), repeat=n)), dtype=np.int64)
    probs = np.prod(np.where(configs == 1, alpha, 1.0 - alpha), axis=1)
    K = configs.sum(axis=1)
    M = configs @ ks
    spread = 0.0
    for key in set(zip(K.tolist(), M.tolist())):
        sel = (K == key[0]) & (M == key[1])
        cond = probs[sel] / math.fsum(probs[sel])
        spread = max(spread, float(cond.max() - cond.min()))
    return spread


def enumerate_class(spec: CanonicalSpec) -> list[tuple[int, ...]]:
    """All configurations of a class by brute force (small ``ell`` only)."""
    ks = range(-spec.ell, spec.ell + 1)
    return [
        c
        for c in itertools.product((0, 1), repeat=spec.n)
        if sum(c) == spec.K and sum(k * x for k, x in zip(ks, c)) == spec.M
    ]

"""Adaptive Gauss-Legendre quadrature on finite intervals."""

from __future__ import annotations

from functools import lru_cache
from typing import Callable

import numpy as np


@lru_cache(maxsize=8)
def _nodes(order: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(order)


def _fixed(f, lo: float, hi: float, order: int) -> float:
    x, w = _nodes(order)
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    vals = np.asarray(f(mid + half * x), dtype=float)
    return half * float(np.dot(w, vals))


def integrate(
    f: Callable[[np.ndarray], np.ndarray],
    lo: float,
    hi: float,
    abs_tol: float = 1e-12,
    order: int = 20,
    max_depth: int = 40,
) -> float:
    """Integrate a vectorized ``f`` over ``[lo, hi]``.

    Each panel is compared with the sum of its two halves; panels whose
    discrepancy exceeds their share of ``abs_tol`` are split. The halves'
    sum is returned for accepted panels.
    """
    if hi == lo:
        return 0.0
    sign = 1.0
    if hi < lo:
        lo, hi, sign = hi, lo, -1.0
    total = 0.0
    width = hi - lo
    stack = [(lo, hi, _fixed(f, lo, hi, order), 0)]
    while stack:
        a, b, whole, depth = stack.pop()
        m = 0.5 * (a + b)
        left = _fixed(f, a, m, order)
        right = _fixed(f, m, b, order)
        share = abs_tol * (b - a) / width
        if abs(left + right - whole) <= share or depth >= max_depth:
            total += left + right
        else:
            stack.append((a, m, left, depth + 1))
            stack.append((m, b, right, depth + 1))
    return sign * total


def integrate_2d(
    f: Callable[[np.ndarray, np.ndarray], np.ndarray],
    xlim: tuple[float, float],
    ylim: tuple[float, float],
    abs_tol: float = 1e-10,
) -> float:
    """Iterated adaptive integration of ``f(x, y)`` over a rectangle."""

    def inner(xs: np.ndarray) -> np.ndarray:
        return np.array(
            [integrate(lambda y: f(np.full_like(y, x), y), *ylim, abs_tol=abs_tol) for x in xs]
        )

    return integrate(inner, *xlim, abs_tol=abs_tol)

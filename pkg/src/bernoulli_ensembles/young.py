"""Height functions of particle configurations and their limit curves.

A configuration on ``{-ell..ell}`` is read as a Young diagram with distinct
parts through its height function ``psi(u) = #{k > u occupied}``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np

from .ensemble import ParticleConfig
from .errors import IntervalMismatch
from .profile import ProfileParams, beta, beta_integral, beta_prime
from .quadrature import integrate

DEFAULT_GRID = 1024
INTERVAL_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Curve:
    """A real function sampled on a strictly increasing grid.

    ``kind="linear"`` interpolates between samples; ``kind="step"`` is the
    right-continuous step function equal to ``values[i]`` on
    ``[grid[i], grid[i+1])``. Optional ``d1``/``d2`` carry exact first and
    second derivatives at the grid points.
    """

    grid: np.ndarray
    values: np.ndarray
    kind: str = "linear"
    d1: Optional[np.ndarray] = None
    d2: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        grid = np.array(self.grid, dtype=float).reshape(-1)
        values = np.array(self.values, dtype=float).reshape(-1)
        if grid.shape != values.shape:
            raise ValueError(f"grid has {grid.size} points but values has {values.size}")
        if grid.size < 2 or np.any(np.diff(grid) <= 0.0):
            raise ValueError("grid must be strictly increasing with at least two points")
        if self.kind not in ("linear", "step"):
            raise ValueError(f"unknown curve kind {self.kind!r}")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        for name in ("d1", "d2"):
            d = getattr(self, name)
            if d is not None:
                d = np.array(d, dtype=float).reshape(-1)
                if d.shape != grid.shape:
                    raise ValueError(f"{name} must match the grid")
                object.__setattr__(self, name, d)

    @property
    def interval(self) -> tuple[float, float]:
        return float(self.grid[0]), float(self.grid[-1])

    def __len__(self) -> int:
        return self.grid.size

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "linear":
            out = np.interp(x, self.grid, self.values)
        else:
            idx = np.searchsorted(self.grid, x, side="right") - 1
            out = self.values[np.clip(idx, 0, self.grid.size - 1)]
        return float(out) if out.ndim == 0 else out

    def left_limit(self, x):
        """Limit from the left; equals the value except at jumps of a step curve."""
        if self.kind == "linear":
            return self(x)
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self.grid, x, side="left") - 1
        out = self.values[np.clip(idx, 0, self.grid.size - 1)]
        return float(out) if out.ndim == 0 else out

    def shifted(self, dx: float) -> "Curve":
        return Curve(self.grid + dx, self.values, self.kind, self.d1, self.d2)


@dataclass(frozen=True, eq=False)
class HeightFunction:
    """``psi(u) = sum_{k > u} eta_k`` on the cells ``[u, u+1)``, ``u = -ell-1..ell-1``.

    ``cells[i]`` holds the value on the cell starting at ``u = i - ell - 1``;
    ``psi(ell) = 0`` is implicit.
    """

    ell: int
    cells: np.ndarray

    def __post_init__(self) -> None:
        cells = np.array(self.cells, dtype=np.int64).reshape(-1)
        if cells.size != 2 * self.ell + 1:
            raise ValueError(f"need {2 * self.ell + 1} cells, got {cells.size}")
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)

    @property
    def K(self) -> int:
        return int(self.cells[0])

    def area(self) -> int:
        """Sum over the integer cells; equals ``(ell+1) K + M``."""
        return int(self.cells.sum())

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        idx = np.floor(u).astype(np.int64) + self.ell + 1
        inside = (idx >= 0) & (idx < self.cells.size)
        out = np.where(inside, self.cells[np.clip(idx, 0, self.cells.size - 1)], 0)
        out = np.where(idx < 0, self.K, out)
        return int(out) if out.ndim == 0 else out

    def scaled_steps(self) -> Curve:
        """Exact ``x -> psi(ell x) / ell`` on [-1, 1] as a right-continuous step curve."""
        ks = np.arange(-self.ell, self.ell + 1)
        # cell u = k holds cells[k + ell + 1]; the last point k = ell carries psi(ell) = 0
        vals = np.append(self.cells[1:], 0) / self.ell
        return Curve(ks / self.ell, vals, kind="step")


def height_from_config(c: Union[ParticleConfig, Sequence[int]], ell: Optional[int] = None) -> HeightFunction:
    """Height function by suffix sums of the occupation numbers."""
    if isinstance(c, ParticleConfig):
        occ, ell = np.asarray(c.occupancy), c.ell
    else:
        occ = np.asarray(c)
        if ell is None:
            ell = (occ.size - 1) // 2
    cells = np.cumsum(occ[::-1].astype(np.int64))[::-1]
    return HeightFunction(ell, cells)


def scaled_height(h: HeightFunction, grid_points: int = DEFAULT_GRID) -> Curve:
    """Samples of ``psi(ell x) / ell`` on a uniform grid over [-1, 1]."""
    if grid_points < 2:
        raise ValueError("grid_points must be at least 2")
    x = np.linspace(-1.0, 1.0, grid_points)
    # right continuity: snap ell*x onto an integer when rounding put it just below
    u = np.floor(h.ell * x + 1e-9)
    return Curve(x, h(u) / h.ell, kind="step")


def limit_curve(p: ProfileParams, grid_points: int = DEFAULT_GRID) -> Curve:
    """``psi(x) = int_x^1 beta(y) dy`` on [-1, 1], with ``psi' = -beta`` and ``psi'' = -beta'``."""
    if grid_points < 2:
        raise ValueError("grid_points must be at least 2")
    x = np.linspace(-1.0, 1.0, grid_points)
    return Curve(x, beta_integral(x, p), d1=-beta(x, p), d2=-beta_prime(x, p))


def sup_distance(a: Curve, b: Curve) -> float:
    """``sup |a - b|`` over the common interval.

    Both curves are evaluated on the union of their grids, from the right
    and from the left, so every jump of a step curve is seen.
    """
    (a0, a1), (b0, b1) = a.interval, b.interval
    if abs(a0 - b0) > INTERVAL_TOL or abs(a1 - b1) > INTERVAL_TOL:
        raise IntervalMismatch(f"intervals differ: [{a0}, {a1}] vs [{b0}, {b1}]")
    x = np.union1d(a.grid, b.grid)
    right = np.abs(a(x) - b(x))
    left = np.abs(a.left_limit(x) - b.left_limit(x))
    return float(max(right.max(), left.max()))


def _occupancies(samples: Iterable) -> tuple[int, np.ndarray]:
    rows = []
    ell = None
    for s in samples:
        if isinstance(s, ParticleConfig):
            occ, l = np.asarray(s.occupancy), s.ell
        else:
            occ = np.asarray(s)
            l = (occ.size - 1) // 2
        if ell is None:
            ell = l
        elif l != ell:
            raise ValueError("all samples must share one ell")
        rows.append(occ)
    if not rows:
        raise ValueError("need at least one sample")
    return ell, np.vstack(rows).astype(float)


TestFunction = Union[Curve, Callable[[np.ndarray], np.ndarray]]


def moment_test(samples, test_fn: TestFunction, p: Optional[ProfileParams] = None) -> tuple[float, float]:
    """Empirical mean and variance of ``(1/ell) sum_k eta_k f(k/ell)`` over the samples.

    ``p`` is accepted for symmetry with :func:`moment_limit`, which gives
    the value the mean should approach.
    """
    ell, occ = _occupancies(samples)
    x = np.arange(-ell, ell + 1) / ell
    stat = occ @ np.asarray(test_fn(x), dtype=float) / ell
    return float(stat.mean()), float(stat.var())


def moment_limit(test_fn: TestFunction, p: ProfileParams) -> float:
    """``int_{-1}^{1} beta(x) f(x) dx``."""
    return integrate(lambda x: beta(x, p) * np.asarray(test_fn(x), dtype=float), -1.0, 1.0)


def height_limit_constraints(p: ProfileParams) -> dict[str, float]:
    """``psi(-1)``, ``psi(1)`` and ``int psi`` of the limit curve, for comparison with ``2 rho`` and ``2 rho + 4 m``."""
    return {
        "psi_left": float(beta_integral(-1.0, p)),
        "psi_right": float(beta_integral(1.0, p)),
        "area": integrate(lambda x: beta_integral(x, p), -1.0, 1.0),
    }


__all__ = [
    "Curve",
    "HeightFunction",
    "height_from_config",
    "scaled_height",
    "limit_curve",
    "sup_distance",
    "moment_test",
    "moment_limit",
    "height_limit_constraints",
    "DEFAULT_GRID",
]

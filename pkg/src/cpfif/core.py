"""Shared data model: datasets, affine partition maps, grids.

Interval indices are zero-based throughout: interval ``s`` spans
``[x[s], x[s + 1]]`` for ``s = 0 .. M - 2``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class DomainError(ValueError):
    """Abscissa outside ``[x_1, x_M]``."""


class InadmissibleScalingError(ValueError):
    """Scaling vector violates the admissibility condition of a construction."""


class ResourceLimitError(RuntimeError):
    """Requested computation would exceed a configured resource cap."""


def _readonly(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class DataSet:
    """Interpolation data ``(x_t, u_t)`` with strictly increasing abscissae."""

    x: np.ndarray
    u: np.ndarray

    def __post_init__(self):
        x = _readonly(self.x)
        u = _readonly(self.u)
        if x.ndim != 1 or u.ndim != 1 or x.shape != u.shape:
            raise ValueError("x and u must be 1-D arrays of equal length")
        if x.size < 3:
            raise ValueError(f"need at least 3 knots, got {x.size}")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(u))):
            raise ValueError("knots must be finite")
        if np.any(np.diff(x) <= 0):
            raise ValueError("abscissae must be strictly increasing")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "u", u)

    @classmethod
    def from_points(cls, points) -> "DataSet":
        pts = np.asarray(points, dtype=float)
        return cls(pts[:, 0], pts[:, 1])

    @property
    def size(self) -> int:
        return int(self.x.size)

    @property
    def n_intervals(self) -> int:
        return self.size - 1

    @property
    def lo(self) -> float:
        return float(self.x[0])

    @property
    def hi(self) -> float:
        return float(self.x[-1])

    @property
    def span(self) -> float:
        return float(self.x[-1] - self.x[0])

    def points(self) -> np.ndarray:
        return np.column_stack([self.x, self.u])


@dataclass(frozen=True, eq=False)
class AffineMaps:
    """Contractions ``L_s(x) = a_s x + b_s`` sending ``[x_1, x_M]`` onto interval ``s``.

    Evaluation uses the equivalent form ``x_s + h_s (x - x_1) / l`` so that
    the endpoints map to the knots up to rounding of the last operation.
    """

    a: np.ndarray
    b: np.ndarray
    knots: np.ndarray = field(repr=False)

    @property
    def n_intervals(self) -> int:
        return int(self.a.size)

    def apply(self, s, x):
        s = np.asarray(s)
        k = self.knots
        h = k[s + 1] - k[s]
        x = np.asarray(x, dtype=float)
        y = k[s] + h * (x - k[0]) / (k[-1] - k[0])
        # endpoints map onto knots exactly; inverse maps expand any rounding here
        return np.where(x == k[-1], k[s + 1], y)

    def inverse(self, s, y):
        s = np.asarray(s)
        k = self.knots
        h = k[s + 1] - k[s]
        y = np.asarray(y, dtype=float)
        x = k[0] + (y - k[s]) * (k[-1] - k[0]) / h
        return np.where(y == k[s + 1], k[-1], x)


def build_affine_maps(data: DataSet) -> AffineMaps:
    x = data.x
    ell = x[-1] - x[0]
    a = np.diff(x) / ell
    b = x[:-1] - a * x[0]
    return AffineMaps(a=_readonly(a), b=_readonly(b), knots=x)


def locate_interval(data: DataSet, x):
    """Index of the interval containing ``x``.

    Interior knots belong to the interval they open (left-closed), and the
    right endpoint belongs to the last interval.  Accepts scalars or arrays.
    """
    xs = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(xs)) or np.any(xs < data.x[0]) or np.any(xs > data.x[-1]):
        raise DomainError(f"x outside [{data.lo}, {data.hi}]")
    s = np.searchsorted(data.x, xs, side="right") - 1
    s = np.minimum(s, data.n_intervals - 1)
    return int(s) if s.ndim == 0 else s


@dataclass(frozen=True)
class Grid:
    """Uniform grid of ``n`` points on ``[lo, hi]`` including both endpoints."""

    lo: float
    hi: float
    n: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("grid needs at least 2 points")
        if not self.hi > self.lo:
            raise ValueError("grid requires hi > lo")

    @classmethod
    def over(cls, data: DataSet, n: int) -> "Grid":
        return cls(data.lo, data.hi, int(n))

    @property
    def step(self) -> float:
        return (self.hi - self.lo) / (self.n - 1)

    @property
    def points(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.n)


def as_scaling(lam, n_intervals: int) -> np.ndarray:
    """Broadcast a scalar or validate a vector of vertical scaling factors."""
    arr = np.asarray(lam, dtype=float)
    if arr.ndim == 0:
        arr = np.full(n_intervals, float(arr))
    if arr.shape != (n_intervals,):
        raise ValueError(f"expected {n_intervals} scaling factors, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise InadmissibleScalingError("scaling factors must be finite")
    if np.any(np.abs(arr) >= 1):
        raise InadmissibleScalingError("scaling factors must satisfy |lambda_s| < 1")
    return _readonly(arr)

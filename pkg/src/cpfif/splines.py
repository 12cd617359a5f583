"""Reference cubic interpolants and classical baselines.

The spline ``S`` is stored per interval in the Bernstein-like form

    S = U(1-z)^3 + V z(1-z)^2 + W z^2(1-z) + X z^3,   z = (x - x_s) / h_s

with ``U = y_s``, ``V = 3 y_s + h_s d_s``, ``W = 3 y_{s+1} - h_s d_{s+1}``,
``X = y_{s+1}``; this is a cubic Hermite interpolant with knot slopes ``d``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .core import DataSet, Grid, locate_interval

SCHEMES = ("natural_spline", "three_point")


def estimate_derivatives(data: DataSet, scheme: str = "natural_spline") -> np.ndarray:
    """Knot slopes for the reference spline.

    ``natural_spline`` solves the tridiagonal slope system of the C2 cubic
    spline with ``S''(x_1) = S''(x_M) = 0``.  ``three_point`` uses the
    non-uniform three-point difference at interior knots and the slope of
    the quadratic through the first (last) three knots at the ends.
    """
    x, y = data.x, data.u
    h = np.diff(x)
    delta = np.diff(y) / h
    n = data.size
    if scheme == "natural_spline":
        ab = np.zeros((3, n))
        rhs = np.empty(n)
        ab[1, 0], ab[0, 1], rhs[0] = 2.0, 1.0, 3.0 * delta[0]
        ab[1, -1], ab[2, -2], rhs[-1] = 2.0, 1.0, 3.0 * delta[-1]
        # row i: h_i d_{i-1} + 2(h_{i-1} + h_i) d_i + h_{i-1} d_{i+1}
        ab[2, :-2] = h[1:]
        ab[1, 1:-1] = 2.0 * (h[:-1] + h[1:])
        ab[0, 2:] = h[:-1]
        rhs[1:-1] = 3.0 * (h[1:] * delta[:-1] + h[:-1] * delta[1:])
        return solve_banded((1, 1), ab, rhs)
    if scheme == "three_point":
        d = np.empty(n)
        d[1:-1] = (h[1:] * delta[:-1] + h[:-1] * delta[1:]) / (h[:-1] + h[1:])
        d[0] = ((2 * h[0] + h[1]) * delta[0] - h[0] * delta[1]) / (h[0] + h[1])
        d[-1] = ((2 * h[-1] + h[-2]) * delta[-1] - h[-1] * delta[-2]) / (h[-1] + h[-2])
        return d
    raise ValueError(f"unknown derivative scheme {scheme!r}; expected one of {SCHEMES}")


@dataclass(frozen=True, eq=False)
class SplineModel:
    data: DataSet
    d: np.ndarray
    U: np.ndarray = field(repr=False)
    V: np.ndarray = field(repr=False)
    W: np.ndarray = field(repr=False)
    X: np.ndarray = field(repr=False)
    # power-basis coefficients in z, shape (4, M-1)
    _power: np.ndarray = field(repr=False)

    @property
    def h(self) -> np.ndarray:
        return np.diff(self.data.x)

    def __call__(self, x, order: int = 0):
        return eval_spline(self, x, order)

    def knot_one_sided(self, order: int):
        """Left and right limits of ``S^(order)`` at the interior knots."""
        c = self._power
        h = self.h
        left = _poly_derivative(c[:, :-1], np.ones(h.size - 1), order) / h[:-1] ** order
        right = _poly_derivative(c[:, 1:], np.zeros(h.size - 1), order) / h[1:] ** order
        return left, right


def build_spline(data: DataSet, d) -> SplineModel:
    d = np.array(d, dtype=float)
    if d.shape != data.x.shape:
        raise ValueError(f"derivative vector has length {d.size}, expected {data.size}")
    y = data.u
    h = np.diff(data.x)
    U = y[:-1].copy()
    X = y[1:].copy()
    V = 3.0 * y[:-1] + h * d[:-1]
    W = 3.0 * y[1:] - h * d[1:]
    power = np.vstack([U, V - 3 * U, 3 * U - 2 * V + W, X - W + V - U])
    for arr in (d, U, V, W, X, power):
        arr.setflags(write=False)
    return SplineModel(data, d, U, V, W, X, power)


def _poly_derivative(c, z, order):
    c0, c1, c2, c3 = c
    if order == 0:
        return ((c3 * z + c2) * z + c1) * z + c0
    if order == 1:
        return (3 * c3 * z + 2 * c2) * z + c1
    if order == 2:
        return 6 * c3 * z + 2 * c2
    if order == 3:
        return 6 * c3 * np.ones_like(z)
    raise ValueError("order must be 0, 1, 2 or 3")


def eval_spline(model: SplineModel, x, order: int = 0):
    """Evaluate ``S`` or one of its derivatives at scalar or array ``x``."""
    s = locate_interval(model.data, x)
    xs = np.asarray(x, dtype=float)
    h = model.h[s]
    z = (xs - model.data.x[s]) / h
    out = _poly_derivative(model._power[:, s], z, order) / h**order
    return float(out) if np.ndim(out) == 0 else out


def eval_piece(model: SplineModel, s, x, order: int = 0):
    """Evaluate the cubic of interval ``s`` at ``x`` (no interval lookup)."""
    s = np.asarray(s)
    h = model.h[s]
    z = (np.asarray(x, dtype=float) - model.data.x[s]) / h
    return _poly_derivative(model._power[:, s], z, order) / h**order


def sup_norms(model: SplineModel, grid: Grid | None = None) -> tuple[float, float]:
    """``(K, C) = (max |S'|, max |S''|)`` over the grid and all knot one-sided limits."""
    if grid is None:
        grid = Grid.over(model.data, 2001)
    pts = grid.points
    K = np.max(np.abs(eval_spline(model, pts, 1)))
    C = np.max(np.abs(eval_spline(model, pts, 2)))
    if model.data.size > 2:
        for order in (1, 2):
            left, right = model.knot_one_sided(order)
            m = max(np.max(np.abs(left), initial=0.0), np.max(np.abs(right), initial=0.0))
            if order == 1:
                K = max(K, m)
            else:
                C = max(C, m)
    return float(K), float(C)


def pchip_slopes(data: DataSet) -> np.ndarray:
    """Fritsch-Carlson monotone slopes."""
    x, y = data.x, data.u
    h = np.diff(x)
    delta = np.diff(y) / h
    d = np.empty(data.size)
    d[1:-1] = 0.5 * (delta[:-1] + delta[1:])
    d[0], d[-1] = delta[0], delta[-1]
    flat_or_turn = np.zeros(data.size, dtype=bool)
    flat_or_turn[1:-1] = delta[:-1] * delta[1:] <= 0
    d[flat_or_turn] = 0.0
    for k in range(delta.size):
        if delta[k] == 0.0:
            d[k] = d[k + 1] = 0.0
            continue
        alpha = d[k] / delta[k]
        beta = d[k + 1] / delta[k]
        # slopes pointing against the secant would leave the monotone region
        if alpha < 0:
            d[k] = alpha = 0.0
        if beta < 0:
            d[k + 1] = beta = 0.0
        r = alpha * alpha + beta * beta
        if r > 9.0:
            tau = 3.0 / np.sqrt(r)
            d[k] = tau * alpha * delta[k]
            d[k + 1] = tau * beta * delta[k]
    return d


@dataclass(frozen=True, eq=False)
class BaselineInterpolant:
    kind: str
    data: DataSet
    spline: SplineModel | None = None

    def __call__(self, x):
        return eval_baseline(self, x)


def build_baseline(data: DataSet, kind: str) -> BaselineInterpolant:
    if kind == "linear":
        return BaselineInterpolant("linear", data)
    if kind == "pchip":
        return BaselineInterpolant("pchip", data, build_spline(data, pchip_slopes(data)))
    raise ValueError(f"unknown baseline kind {kind!r}")


def eval_baseline(b: BaselineInterpolant, x):
    if b.kind == "pchip":
        return eval_spline(b.spline, x)
    locate_interval(b.data, x)
    out = np.interp(x, b.data.x, b.data.u)
    return float(out) if np.ndim(out) == 0 else out

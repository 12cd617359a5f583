"""Fractal interpolation functions built on a reference cubic spline.

Every model here is an affine IFS ``w_s(x, u) = (L_s(x), lambda_s u + H_s(x))``
whose attractor is the graph of an interpolant ``F``.  Two constructions are
provided:

``hermite_cubic``
    The C1 cubic FIF whose vertical maps are cubics in ``theta = (x - x_1)/l``
    with coefficients ``U, V, W, X`` built from the data and knot slopes.

``curvature_preserving``
    ``F(L_s(x)) = lambda_s (F(x) - b(x)) + S(L_s(x))`` where ``S`` is the
    reference spline and ``b`` a base function sharing ``S``'s values (and,
    for the Hermite bases, derivatives) at ``x_1`` and ``x_M``.  The
    ``literal`` form ``F(L_s(x)) = lambda_s F(x) + S(x) + delta_s(x)`` with
    ``delta_s = (1 - lambda_s)(S - chord_s)`` is kept for comparison; it does
    not interpolate the data in general.

Internally each model exposes the forcing term ``T`` of the order-``m``
derivative system

    F^(m)(y) = (lambda_s / a_s^m) F^(m)(x) + T_s^(m)(x, y),   y = L_s(x),

which is all that grid iteration, pointwise evaluation and attractor
refinement need.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P

from .core import (
    AffineMaps,
    DataSet,
    DomainError,
    Grid,
    InadmissibleScalingError,
    ResourceLimitError,
    as_scaling,
    build_affine_maps,
    locate_interval,
)
from .splines import SplineModel, eval_piece, eval_spline

DEFAULT_POINT_CAP = 2**22
POINT_CAP_ENV = "CPFIF_POINT_CAP"
KNOT_TOL = 1e-10

BASES = ("hermite5", "hermite3", "chord")


class InterpolationError(RuntimeError):
    """A built model fails to reproduce the data at the knots."""


def point_cap() -> int:
    raw = os.environ.get(POINT_CAP_ENV)
    return int(raw) if raw else DEFAULT_POINT_CAP


def _hermite_poly(left, right, ell):
    """Coefficients in ``t = (x - x_1)/l`` of the Hermite polynomial matching
    ``left = [f, f', ...]`` at ``x_1`` and ``right`` at ``x_M`` (x-derivatives)."""
    r = len(left)
    deg = 2 * r - 1
    A = np.zeros((2 * r, deg + 1))
    rhs = np.zeros(2 * r)
    for k in range(r):
        # k-th t-derivative of t^j at t = 0 and t = 1
        for j in range(k, deg + 1):
            fall = math.perm(j, k)
            A[k, j] = fall if j == k else 0.0
            A[r + k, j] = fall
        rhs[k] = left[k] * ell**k
        rhs[r + k] = right[k] * ell**k
    return np.linalg.solve(A, rhs)


@dataclass(frozen=True, eq=False)
class FifModel:
    variant: str
    data: DataSet
    maps: AffineMaps
    lam: np.ndarray
    spline: SplineModel
    form: str = "alpha"
    base: str | None = None
    # hermite_cubic: per-interval U, V, W, X in theta; rows of shape (4, M-1)
    coeffs: np.ndarray | None = field(default=None, repr=False)
    # curvature_preserving/alpha: power coefficients of b in theta
    base_poly: np.ndarray | None = field(default=None, repr=False)

    @property
    def lam_norm(self) -> float:
        return float(np.max(np.abs(self.lam)))

    def ratio(self, m: int) -> np.ndarray:
        return self.lam / self.maps.a**m

    def forcing(self, s, x, y, m: int = 0):
        """``T_s^(m)(x, y)`` for ``y = L_s(x)``; arrays broadcast together."""
        s = np.asarray(s)
        x = np.asarray(x, dtype=float)
        ell = self.data.span
        lam = self.lam[s]
        am = self.maps.a[s] ** m
        theta = (x - self.data.lo) / ell
        if self.variant == "hermite_cubic":
            U, V, W, X = self.coeffs[:, s]
            power = np.stack([U, V - 3 * U, 3 * U - 2 * V + W, X - W + V - U])
            return _polyval_deriv(power, theta, m) / (ell**m * am)
        if self.form == "literal":
            k = self.data.x
            u = self.data.u
            h = k[s + 1] - k[s]
            slope = (u[s + 1] - u[s]) / h
            if m == 0:
                chord = u[s] + slope * (x - k[s])
            elif m == 1:
                chord = slope
            else:
                chord = 0.0
            sx = eval_spline(self.spline, x, m)
            return (sx + (1 - lam) * (sx - chord)) / am
        return eval_piece(self.spline, s, y, m) - lam / am * self.base_value(x, m)

    def base_value(self, x, m: int = 0):
        theta = (np.asarray(x, dtype=float) - self.data.lo) / self.data.span
        if self.base_poly is None:
            raise ValueError("model has no base function")
        return P.polyval(theta, P.polyder(self.base_poly, m)) / self.data.span**m

    def knot_residuals(self) -> np.ndarray:
        """``F_s(x_1, u_1) - u_s`` and ``F_s(x_M, u_M) - u_{s+1}`` per interval."""
        s = np.arange(self.maps.n_intervals)
        x1 = np.full(s.size, self.data.lo)
        xM = np.full(s.size, self.data.hi)
        left = self.lam * self.data.u[0] + self.forcing(s, x1, self.data.x[s], 0)
        right = self.lam * self.data.u[-1] + self.forcing(s, xM, self.data.x[s + 1], 0)
        return np.concatenate([left - self.data.u[:-1], right - self.data.u[1:]])

    def __call__(self, x, tol: float = 1e-12):
        return eval_fif(self, x, tol)


def _polyval_deriv(power, t, m):
    c0, c1, c2, c3 = power
    if m == 0:
        return ((c3 * t + c2) * t + c1) * t + c0
    if m == 1:
        return (3 * c3 * t + 2 * c2) * t + c1
    if m == 2:
        return 6 * c3 * t + 2 * c2
    raise ValueError("derivative order must be 0, 1 or 2")


def _verify(model: FifModel) -> FifModel:
    res = np.max(np.abs(model.knot_residuals()))
    if not res <= KNOT_TOL:
        raise InterpolationError(f"map components miss the knots by {res:.3e}")
    return model


def build_hermite_cubic_fif(data: DataSet, lam, d) -> FifModel:
    """C1 cubic FIF; requires ``|lambda_s| < a_s``."""
    from .splines import build_spline

    maps = build_affine_maps(data)
    lam = as_scaling(lam, data.n_intervals)
    if np.any(np.abs(lam) >= maps.a):
        raise InadmissibleScalingError("C1 cubic FIF needs |lambda_s| < a_s for every s")
    d = np.asarray(d, dtype=float)
    y = data.u
    ell = data.span
    a = maps.a
    U = y[:-1] - lam * y[0]
    V = 3 * (y[:-1] - lam * y[0]) + ell * (a * d[:-1] - lam * d[0])
    W = 3 * (y[1:] - lam * y[-1]) - ell * (a * d[1:] - lam * d[-1])
    X = y[1:] - lam * y[-1]
    coeffs = np.vstack([U, V, W, X])
    coeffs.setflags(write=False)
    spline = build_spline(data, d)
    return _verify(FifModel("hermite_cubic", data, maps, lam, spline, coeffs=coeffs))


def build_cp_cfif(
    data: DataSet,
    lam,
    spline: SplineModel,
    base: str = "hermite5",
    form: str = "alpha",
    verify: bool = True,
) -> FifModel:
    """Curvature-preserving cubic FIF anchored on ``spline``.

    ``base`` selects the function ``b`` subtracted inside the recursion:
    ``hermite5`` matches ``S, S', S''`` at both ends (``F`` is C2 when
    ``|lambda_s| < a_s^2``), ``hermite3`` matches ``S, S'`` (C1 when
    ``|lambda_s| < a_s``) and ``chord`` matches values only (C0).
    ``form="literal"`` ignores ``base`` and uses the uncorrected recursion;
    pass ``verify=False`` to build it despite its knot mismatch.
    """
    lam = as_scaling(lam, data.n_intervals)
    maps = build_affine_maps(data)
    if form == "literal":
        model = FifModel("curvature_preserving", data, maps, lam, spline, form="literal")
        return _verify(model) if verify else model
    if form != "alpha":
        raise ValueError(f"unknown form {form!r}")
    if base not in BASES:
        raise ValueError(f"unknown base {base!r}; expected one of {BASES}")
    order = {"chord": 1, "hermite3": 2, "hermite5": 3}[base]
    left = [eval_piece(spline, 0, data.lo, m) for m in range(order)]
    right = [eval_piece(spline, data.n_intervals - 1, data.hi, m) for m in range(order)]
    poly = _hermite_poly(left, right, data.span)
    poly.setflags(write=False)
    model = FifModel("curvature_preserving", data, maps, lam, spline, base=base, base_poly=poly)
    return _verify(model) if verify else model


@dataclass
class SampledCurve:
    """Samples of ``F`` (and optionally ``F'``, ``F''``) at abscissae ``x``.

    ``sources`` records how each derivative was obtained: ``derivative_ifs``
    or ``finite_difference``.
    """

    x: np.ndarray
    f: np.ndarray
    f1: np.ndarray | None = None
    f2: np.ndarray | None = None
    sources: tuple = ()
    iterations: int = 0
    distances: list = field(default_factory=list)

    def __post_init__(self):
        for arr in (self.f, self.f1, self.f2):
            if arr is None:
                continue
            if arr.shape != self.x.shape:
                raise ValueError("sample arrays must match the abscissae")
            if not np.all(np.isfinite(arr)):
                raise ValueError("non-finite samples")

    def contraction_factors(self, floor: float = 0.0) -> np.ndarray:
        d = np.asarray(self.distances)
        keep = d[:-1] > floor
        return d[1:][keep] / d[:-1][keep]


def refine_attractor(model: FifModel, depth: int, cap: int | None = None) -> SampledCurve:
    """Exact attractor points obtained by applying the IFS ``depth`` times to the knots."""
    if depth < 0:
        raise ValueError("depth must be non-negative")
    cap = point_cap() if cap is None else cap
    n_maps = model.maps.n_intervals
    count = n_maps ** (depth + 1) + 1
    if count > cap:
        raise ResourceLimitError(f"depth {depth} needs {count} points, cap is {cap}")
    xs = model.data.x.copy()
    fs = model.data.u.copy()
    for _ in range(depth):
        new_x, new_f = [], []
        for s in range(n_maps):
            y = model.maps.apply(s, xs)
            val = model.lam[s] * fs + model.forcing(s, xs, y, 0)
            # image of x_1 under map s duplicates the image of x_M under map s-1
            start = 0 if s == 0 else 1
            new_x.append(y[start:])
            new_f.append(val[start:])
        xs = np.concatenate(new_x)
        fs = np.concatenate(new_f)
    return SampledCurve(xs, fs)


def amplitude_bound(model: FifModel, samples: int = 513) -> float:
    """Upper estimate of ``sup |F - S|`` from the defect of ``S`` under the operator."""
    lamn = model.lam_norm
    if lamn == 0:
        return 0.0
    x = np.linspace(model.data.lo, model.data.hi, samples)
    s = np.arange(model.maps.n_intervals)[:, None]
    y = model.maps.apply(s, x[None, :])
    defect = (
        model.lam[s] * eval_spline(model.spline, x)[None, :]
        + model.forcing(s, x[None, :], y, 0)
        - eval_piece(model.spline, s, y, 0)
    )
    return 1.25 * float(np.max(np.abs(defect))) / (1 - lamn) + 1e-300


def eval_fif(model: FifModel, x, tol: float = 1e-12):
    """Pointwise value of ``F`` to absolute accuracy ``tol``.

    ``x`` is pulled back through the inverse maps ``depth`` times, seeding the
    recursion with ``S`` at the terminal point; the truncation error is at
    most ``||lambda||^depth * R`` with ``R`` from :func:`amplitude_bound`.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    scalar = np.ndim(x) == 0
    y = np.atleast_1d(np.asarray(x, dtype=float))
    locate_interval(model.data, y)
    lamn = model.lam_norm
    R = amplitude_bound(model)
    if lamn == 0 or R <= tol:
        depth = 1
    else:
        depth = max(1, math.ceil(math.log(tol / R) / math.log(lamn)))
    acc = np.zeros_like(y)
    weight = np.ones_like(y)
    for _ in range(depth):
        s = locate_interval(model.data, y)
        xp = np.clip(model.maps.inverse(s, y), model.data.lo, model.data.hi)
        acc += weight * model.forcing(s, xp, y, 0)
        weight = weight * model.lam[s]
        y = xp
    acc += weight * eval_spline(model.spline, y)
    return float(acc[0]) if scalar else acc


def _fixed_point(model: FifModel, pts: np.ndarray, m: int, tol: float):
    ratio = model.ratio(m)
    rho = float(np.max(np.abs(ratio)))
    if rho >= 1:
        raise InadmissibleScalingError(f"derivative order {m} needs |lambda_s| < a_s^{m}")
    s = locate_interval(model.data, pts)
    xp = np.clip(model.maps.inverse(s, pts), model.data.lo, model.data.hi)
    r = ratio[s]
    T = model.forcing(s, xp, pts, m)
    g = eval_piece(model.spline, s, pts, m)
    distances = []
    if rho == 0:
        distances.append(float(np.max(np.abs(T - g))))
        return T, 1, distances
    max_iter = max(1, math.ceil(10 * math.log(tol) / math.log(rho)))
    for it in range(1, max_iter + 1):
        g_new = r * np.interp(xp, pts, g) + T
        dist = float(np.max(np.abs(g_new - g)))
        distances.append(dist)
        g = g_new
        if dist <= tol * (1 - rho):
            return g, it, distances
    raise RuntimeError(
        f"fixed-point iteration did not converge in {max_iter} sweeps (last step {dist:.3e})"
    )


def derivative_ifs_eval(model: FifModel, m: int, grid: Grid, tol: float = 1e-12) -> np.ndarray:
    """``F^(m)`` on the grid as the attractor of the derivative IFS, ``m`` in {1, 2}."""
    if m not in (1, 2):
        raise ValueError("derivative order must be 1 or 2")
    if np.any(np.abs(model.lam) >= model.maps.a**m):
        raise InadmissibleScalingError(f"derivative order {m} needs |lambda_s| < a_s^{m}")
    g, _, _ = _fixed_point(model, grid.points, m, tol)
    return g


def derivative_endpoint_values(model: FifModel, m: int) -> tuple[float, float]:
    """Closed-form ``F^(m)(x_1)`` and ``F^(m)(x_M)`` from the first and last maps."""
    a = model.maps.a
    lam = model.lam
    lo, hi = model.data.lo, model.data.hi
    T0 = float(model.forcing(0, lo, lo, m))
    Tn = float(model.forcing(model.maps.n_intervals - 1, hi, hi, m))
    # T = H^(m) / a^m, so H^(m) / (a^m - lambda) = T / (1 - lambda / a^m)
    return T0 / (1 - lam[0] / a[0] ** m), Tn / (1 - lam[-1] / a[-1] ** m)


def _fd_derivative(model: FifModel, pts: np.ndarray, m: int, h: float, tol: float):
    lo, hi = model.data.lo, model.data.hi
    out = np.empty_like(pts)
    inner = (pts - h >= lo) & (pts + h <= hi)
    fwd = (~inner) & (pts - h < lo)
    bwd = (~inner) & ~fwd
    f = lambda z: eval_fif(model, z, tol)  # noqa: E731
    xi = pts[inner]
    if m == 1:
        out[inner] = (f(xi + h) - f(xi - h)) / (2 * h)
    else:
        out[inner] = (f(xi + h) - 2 * f(xi) + f(xi - h)) / h**2
    for mask, sgn in ((fwd, 1.0), (bwd, -1.0)):
        if not np.any(mask):
            continue
        xe = pts[mask]
        f0, f1, f2, f3 = (f(np.clip(xe + sgn * k * h, lo, hi)) for k in range(4))
        if m == 1:
            out[mask] = sgn * (-3 * f0 + 4 * f1 - f2) / (2 * h)
        else:
            out[mask] = (2 * f0 - 5 * f1 + 4 * f2 - f3) / h**2
    return out


def eval_fif_grid(
    model: FifModel,
    grid: Grid,
    tol: float = 1e-12,
    derivatives: bool = True,
    fd_step: float | None = None,
) -> SampledCurve:
    """Fixed-point iteration of the Read-Bajraktarevic operator on ``grid``.

    Off-grid pull-backs are read by linear interpolation; on uniform data
    with ``(n - 1)`` a multiple of ``M - 1`` they land on grid points and the
    iteration is exact.  Derivatives come from the derivative IFS when
    ``|lambda_s| < a_s^m``, otherwise from central differences of
    :func:`eval_fif` with step ``l / 4096``.
    """
    if grid.n < 8 * model.maps.n_intervals:
        raise ValueError(f"grid needs at least {8 * model.maps.n_intervals} points")
    if grid.lo != model.data.lo or grid.hi != model.data.hi:
        raise DomainError("grid must cover [x_1, x_M] exactly")
    pts = grid.points
    f, iters, dists = _fixed_point(model, pts, 0, tol)
    derivs, sources = [], []
    if derivatives:
        h = fd_step if fd_step is not None else model.data.span / 4096
        for m in (1, 2):
            if np.all(np.abs(model.lam) < model.maps.a**m):
                derivs.append(_fixed_point(model, pts, m, tol)[0])
                sources.append("derivative_ifs")
            else:
                derivs.append(_fd_derivative(model, pts, m, h, min(tol, 1e-13)))
                sources.append("finite_difference")
    else:
        derivs = [None, None]
    return SampledCurve(pts, f, derivs[0], derivs[1], tuple(sources), iters, dists)

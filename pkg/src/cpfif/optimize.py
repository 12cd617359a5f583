"""Curvature-deviation penalty, admissible scaling bounds and their minimization."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson, trapezoid

from .core import DataSet, Grid, build_affine_maps
from .curvature import signed_curvature
from .fif import build_cp_cfif, eval_fif_grid
from .splines import SplineModel, eval_spline, sup_norms

ONE_MINUS = float(np.nextafter(1.0, 0.0))
INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class PenaltyConfig:
    """Settings for evaluating and minimizing the curvature penalty.

    ``bounds`` is a per-interval box ``|lambda_s| <= bounds[s]``; when omitted
    it defaults to ``bound_factor * a_s**2`` so every trial keeps an analytic
    second derivative.
    """

    n: int = 1001
    rule: str = "simpson"
    bounds: tuple | None = None
    tol: float = 1e-6
    max_sweeps: int = 200
    lam_min: float = 0.0
    xtol: float = 1e-10
    fp_tol: float = 1e-12
    base: str = "hermite5"
    bound_factor: float = 0.9

    def __post_init__(self):
        if self.n < 65:
            raise ValueError("quadrature grid needs n >= 65")
        if self.rule not in ("simpson", "trapezoid"):
            raise ValueError(f"unknown quadrature rule {self.rule!r}")
        if self.rule == "simpson" and self.n % 2 == 0:
            raise ValueError("Simpson's rule needs an odd number of points")
        if self.lam_min < 0:
            raise ValueError("lam_min must be non-negative")
        if self.bounds is not None:
            b = np.asarray(self.bounds, dtype=float)
            if np.any(b <= 0) or np.any(b >= 1):
                raise ValueError("bounds must lie in (0, 1)")
            if self.lam_min >= b.min():
                raise ValueError("lam_min must be smaller than every bound")
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be positive")

    def resolve_bounds(self, data: DataSet) -> np.ndarray:
        if self.bounds is not None:
            b = np.asarray(self.bounds, dtype=float)
            if b.size == 1:
                b = np.full(data.n_intervals, float(b[0]))
            if b.shape != (data.n_intervals,):
                raise ValueError("bounds length must equal the number of intervals")
        else:
            b = self.bound_factor * build_affine_maps(data).a ** 2
        b = np.minimum(b, 0.999)
        if self.lam_min >= b.min():
            raise ValueError(f"lam_min={self.lam_min} is not below the bound {b.min():.6g}")
        return b


def integrate(values, x, rule: str = "simpson") -> float:
    if rule == "simpson":
        return float(simpson(values, x=x))
    if rule == "trapezoid":
        return float(trapezoid(values, x=x))
    raise ValueError(f"unknown quadrature rule {rule!r}")


@dataclass(frozen=True)
class Theorem4Bounds:
    """Admissible magnitudes for the scaling factors at curvature tolerance ``eps``.

    ``slope_term`` is ``3C / (eps (1 + K^2)^(3/2))`` and ``curvature_term``
    is ``eps (1 + K^2)^(3/2) / ||F''||``; ``curvature_bound`` is the smaller
    of the two and ``beta`` additionally caps it by ``a_s`` and keeps it
    below one.  ``tight`` is ``eps (1 + K^2)^(3/2) / C``.
    """

    K: float
    C: float
    eps: float
    f2_sup: float
    slope_term: float
    curvature_term: float
    tight: float
    curvature_bound: float
    beta: np.ndarray

    def to_dict(self) -> dict:
        def clean(v):
            return None if not math.isfinite(v) else v

        return {
            "K": self.K,
            "C": self.C,
            "eps": self.eps,
            "f2_sup": self.f2_sup,
            "slope_term": clean(self.slope_term),
            "curvature_term": clean(self.curvature_term),
            "tight": clean(self.tight),
            "curvature_bound": clean(self.curvature_bound),
            "beta": [float(v) for v in self.beta],
        }


def theorem4_bounds(
    data: DataSet,
    spline: SplineModel,
    eps: float,
    f2_sup: float | None = None,
    grid: Grid | None = None,
) -> Theorem4Bounds:
    if not eps > 0:
        raise ValueError("curvature tolerance eps must be positive")
    K, C = sup_norms(spline, grid)
    a = build_affine_maps(data).a
    # second derivatives at rounding level count as a straight line
    if C <= 1e-12 * max(1.0, K):
        inf = math.inf
        beta = np.minimum(a, ONE_MINUS)
        return Theorem4Bounds(K, C, eps, f2_sup or C, inf, inf, inf, inf, beta)
    f2 = C if f2_sup is None else float(f2_sup)
    if not f2 > 0:
        raise ValueError("f2_sup must be positive")
    w = (1.0 + K * K) ** 1.5
    slope_term = 3.0 * C / (eps * w)
    curvature_term = eps * w / f2
    tight = eps * w / C
    bound = min(slope_term, curvature_term)
    beta = np.minimum(np.minimum(a, bound), ONE_MINUS)
    return Theorem4Bounds(K, C, eps, f2, slope_term, curvature_term, tight, bound, beta)


def spline_curvature(spline: SplineModel, pts: np.ndarray) -> np.ndarray:
    return signed_curvature(eval_spline(spline, pts, 1), eval_spline(spline, pts, 2))


def penalty_J(lam, data: DataSet, spline: SplineModel, config: PenaltyConfig = PenaltyConfig()) -> float:
    """Integral of the squared curvature deviation between ``F`` and ``S``."""
    model = build_cp_cfif(data, lam, spline, base=config.base)
    grid = Grid.over(data, config.n)
    curve = eval_fif_grid(model, grid, tol=config.fp_tol)
    diff = signed_curvature(curve.f1, curve.f2) - spline_curvature(spline, grid.points)
    return integrate(diff * diff, grid.points, config.rule)


def golden_section(f, lo: float, hi: float, xtol: float = 1e-10, max_iter: int = 200):
    """Minimize a unimodal ``f`` on ``[lo, hi]``; endpoints are candidates too.

    Returns ``(x, f(x), evaluations)``.
    """
    f_lo, f_hi = f(lo), f(hi)
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    evals = 4
    best = min((f_lo, lo), (f_hi, hi), (fc, c), (fd, d))
    for _ in range(max_iter):
        if b - a <= xtol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
            best = min(best, (fc, c))
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
            best = min(best, (fd, d))
        evals += 1
    return best[1], best[0], evals


@dataclass
class PenaltyResult:
    lam: np.ndarray
    J: float
    J_initial: float
    sweeps: int
    converged: bool
    bounds: np.ndarray
    history: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "lambda": [float(v) for v in self.lam],
            "J": self.J,
            "J_initial": self.J_initial,
            "sweeps": self.sweeps,
            "converged": self.converged,
            "bounds": [float(v) for v in self.bounds],
            "history": [float(v) for v in self.history],
        }


def project_scaling(lam, bounds, lam_min: float = 0.0) -> np.ndarray:
    lam = np.clip(np.asarray(lam, dtype=float), -bounds, bounds)
    if lam_min > 0:
        small = np.abs(lam) < lam_min
        lam[small] = np.where(lam[small] < 0, -lam_min, lam_min)
    return lam


def minimize_penalty(
    data: DataSet,
    spline: SplineModel,
    config: PenaltyConfig = PenaltyConfig(),
    lam_init=None,
) -> PenaltyResult:
    """Cyclic coordinate descent with golden-section line searches.

    Each coordinate is searched over ``[-beta_s, beta_s]`` (two sign branches
    when ``lam_min > 0``) and only strict improvements are accepted, so the
    per-sweep objective never increases.  Stops when a sweep gains less than
    ``tol * (1 + J)``.
    """
    bounds = config.resolve_bounds(data)
    if lam_init is None:
        lam_init = 0.5 * bounds
    lam = project_scaling(np.broadcast_to(lam_init, bounds.shape).copy(), bounds, config.lam_min)
    J = penalty_J(lam, data, spline, config)
    J0 = J
    history = [J]
    converged = False
    sweeps = 0
    for sweeps in range(1, config.max_sweeps + 1):
        J_start = J
        for s in range(lam.size):
            hi = float(bounds[s])
            if config.lam_min > 0:
                branches = [(config.lam_min, hi), (-hi, -config.lam_min)]
            else:
                branches = [(-hi, hi)]

            def objective(t, s=s):
                trial = lam.copy()
                trial[s] = t
                return penalty_J(trial, data, spline, config)

            for lo_b, hi_b in branches:
                t, ft, _ = golden_section(objective, lo_b, hi_b, config.xtol)
                if ft < J:
                    lam[s], J = t, ft
        history.append(J)
        if J_start - J < config.tol * (1.0 + J):
            converged = True
            break
    return PenaltyResult(lam, J, J0, sweeps, converged, bounds, history)

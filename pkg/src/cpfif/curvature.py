"""Signed curvature of sampled curves, Menger curvature of data, deviation metrics."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DataSet
from .fif import SampledCurve


@dataclass(frozen=True, eq=False)
class CurvatureProfile:
    x: np.ndarray
    kappa: np.ndarray
    source: str = "analytic_derivative_ifs"

    def __post_init__(self):
        if self.x.shape != self.kappa.shape:
            raise ValueError("curvature and abscissae lengths differ")
        if not np.all(np.isfinite(self.kappa)):
            raise ValueError("non-finite curvature")


def signed_curvature(f1, f2):
    f1 = np.asarray(f1, dtype=float)
    return np.asarray(f2, dtype=float) / (1.0 + f1 * f1) ** 1.5


def curvature_of(curve: SampledCurve) -> CurvatureProfile:
    if curve.f1 is None or curve.f2 is None:
        raise ValueError("curve carries no derivative samples")
    if curve.sources and curve.sources[1] == "finite_difference":
        source = "finite_difference"
    else:
        source = "analytic_derivative_ifs"
    return CurvatureProfile(curve.x, signed_curvature(curve.f1, curve.f2), source)


def menger_curvature(p, q, r):
    """Signed inverse circumradius of the triangle ``p, q, r``.

    Positive for a counter-clockwise (left) turn.  Accepts arrays of points
    with shape ``(..., 2)``.
    """
    p, q, r = (np.asarray(v, dtype=float) for v in (p, q, r))
    u = q - p
    v = r - q
    cross = u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]
    a = np.hypot(u[..., 0], u[..., 1])
    b = np.hypot(v[..., 0], v[..., 1])
    w = r - p
    c = np.hypot(w[..., 0], w[..., 1])
    # 4 * area / (abc) with area = cross / 2
    return 2.0 * cross / (a * b * c)


def discrete_curvature(data: DataSet) -> np.ndarray:
    """Menger curvature at each interior knot."""
    pts = data.points()
    return menger_curvature(pts[:-2], pts[1:-1], pts[2:])


@dataclass(frozen=True)
class CurvatureDeviation:
    max_err: float
    rmse: float
    per_point: np.ndarray


def curvature_deviation(ka: CurvatureProfile, kb: CurvatureProfile) -> CurvatureDeviation:
    if ka.x.shape != kb.x.shape or not np.array_equal(ka.x, kb.x):
        raise ValueError("curvature profiles are sampled on different grids")
    err = np.abs(ka.kappa - kb.kappa)
    return CurvatureDeviation(float(np.max(err)), float(np.sqrt(np.mean(err**2))), err)

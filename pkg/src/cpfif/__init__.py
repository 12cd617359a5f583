"""Curvature-preserving cubic fractal interpolation."""
from .core import (
    AffineMaps,
    DataSet,
    DomainError,
    Grid,
    InadmissibleScalingError,
    ResourceLimitError,
    build_affine_maps,
    locate_interval,
)
from .curvature import (
    CurvatureProfile,
    curvature_deviation,
    curvature_of,
    discrete_curvature,
    menger_curvature,
    signed_curvature,
)
from .fif import (
    FifModel,
    InterpolationError,
    SampledCurve,
    build_cp_cfif,
    build_hermite_cubic_fif,
    derivative_ifs_eval,
    eval_fif,
    eval_fif_grid,
    refine_attractor,
)
from .optimize import PenaltyConfig, PenaltyResult, minimize_penalty, penalty_J, theorem4_bounds
from .splines import (
    BaselineInterpolant,
    SplineModel,
    build_baseline,
    build_spline,
    estimate_derivatives,
    eval_baseline,
    eval_spline,
    sup_norms,
)

__version__ = "0.1.0"

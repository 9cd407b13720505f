"""Exact exterior calculus and Monte-Carlo machinery for moment-map
pushforward (Duistermaat-Heckman) densities of circle actions, plus
log-concavity analysis and the toric slice-volume baseline."""

from .cli import RunConfig
from .construction import (
    CutWindow,
    DegenerateWindowError,
    GaugeError,
    GaugePotential,
    OmegaParams,
    VerificationReport,
    analytic_dh_density,
    build_connection,
    build_omega,
    canonical_chart,
    canonical_gauge,
    curvature_form,
    shifted_gauge,
    sigma,
    standard_construction,
    verify_construction,
)
from .exterior import (
    Chart,
    ChartMismatchError,
    CoordVectorField,
    DimensionError,
    Form,
    Poly,
    UnsupportedIntegrandError,
    Variable,
    evaluate_poly,
    exterior_derivative,
    integrate_over_face,
    interior_product,
    poly_str,
    wedge,
)
from .logconcavity import (
    DomainError,
    ViolationReport,
    analytic_logconcavity,
    concavity_discriminant,
    discrete_logconcavity,
    isolate_roots,
)
from .measure import (
    ComparisonReport,
    DensityEstimate,
    EmptyMeasureError,
    Histogram,
    SamplerConfig,
    compare,
    liouville_weight,
    normalize,
    sample_pushforward,
)
from .toric import (
    EmptyPolytopeError,
    HPolytope,
    InsufficientDataError,
    SliceVolumeFn,
    UnboundedPolytopeError,
    prekopa_check,
    projection_range,
    slice_profile,
    slice_volume_exact_2d,
    slice_volume_mc,
    suggested_tolerance,
)

__version__ = "0.1.0"

__all__ = [
    "Chart", "ChartMismatchError", "ComparisonReport", "CoordVectorField",
    "CutWindow", "DegenerateWindowError", "DensityEstimate", "DimensionError",
    "DomainError", "EmptyMeasureError", "EmptyPolytopeError", "Form",
    "GaugeError", "GaugePotential", "HPolytope", "Histogram",
    "InsufficientDataError", "OmegaParams", "Poly", "RunConfig", "SamplerConfig",
    "SliceVolumeFn", "UnboundedPolytopeError", "UnsupportedIntegrandError",
    "Variable", "VerificationReport", "ViolationReport",
    "analytic_dh_density", "analytic_logconcavity", "build_connection",
    "build_omega", "canonical_chart", "canonical_gauge",
    "concavity_discriminant", "compare", "curvature_form",
    "discrete_logconcavity", "evaluate_poly", "exterior_derivative",
    "integrate_over_face", "interior_product", "isolate_roots",
    "liouville_weight", "normalize", "poly_str", "prekopa_check",
    "projection_range", "sample_pushforward", "shifted_gauge", "sigma",
    "slice_profile", "slice_volume_exact_2d", "slice_volume_mc",
    "standard_construction", "suggested_tolerance", "verify_construction",
    "wedge",
]

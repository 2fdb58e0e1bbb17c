"""Logarithmic diffusion v_t = lap ln v on the plane.

Numerical integration of the conformal Ricci flow on R^2, its geometric
functionals (curvature, circumference at infinity, aperture, total
curvature), and classification of long-time limits into cigar and flat
solitons via gauge-rescaled profiles.
"""

__version__ = "0.1.0"

from .errors import (
    BlowupDetected,
    CFLViolation,
    ConfigError,
    NewtonFailure,
    SolverFailure,
)
from .fields import (
    FlowState,
    InitialDataSpec,
    PlanarField,
    RadialProfile,
    build_initial,
    cigar_orbit,
    cigar_profile,
    exact_cigar_flow,
    radial_grid,
    u_from_v,
    v_from_u,
)
from .geometry import (
    AdmissibilityReport,
    DiagnosticsRow,
    aperture,
    check_admissibility,
    circumference_at_infinity,
    gradient_norm_sq,
    harnack_quantity,
    negative_curvature_integral,
    radial_view,
    scalar_curvature,
    tail_exponent,
    total_curvature,
)
from .harness import (
    ScenarioConfig,
    check_initial,
    compare_runs,
    load_config,
    parse_config,
    run_scenario,
    verify_exact,
)
from .solver import (
    BoundaryCondition,
    StepController,
    Trajectory,
    bind_boundary,
    evolve,
    step_planar_explicit,
    step_radial_implicit,
    step_radial_implicit_vform,
)
from .soliton import (
    ClassifierThresholds,
    LimitClassification,
    RescaledProfile,
    classify_limit,
    fit_cigar,
    gauge_scale,
    rescaled_profile,
    stationarity_residual,
)

__all__ = [
    "__version__",
    "BlowupDetected",
    "CFLViolation",
    "ConfigError",
    "NewtonFailure",
    "SolverFailure",
    "FlowState",
    "InitialDataSpec",
    "PlanarField",
    "RadialProfile",
    "build_initial",
    "cigar_orbit",
    "cigar_profile",
    "exact_cigar_flow",
    "radial_grid",
    "u_from_v",
    "v_from_u",
    "AdmissibilityReport",
    "DiagnosticsRow",
    "aperture",
    "check_admissibility",
    "circumference_at_infinity",
    "gradient_norm_sq",
    "harnack_quantity",
    "negative_curvature_integral",
    "radial_view",
    "scalar_curvature",
    "tail_exponent",
    "total_curvature",
    "ScenarioConfig",
    "check_initial",
    "compare_runs",
    "load_config",
    "parse_config",
    "run_scenario",
    "verify_exact",
    "BoundaryCondition",
    "StepController",
    "Trajectory",
    "bind_boundary",
    "evolve",
    "step_planar_explicit",
    "step_radial_implicit",
    "step_radial_implicit_vform",
    "ClassifierThresholds",
    "LimitClassification",
    "RescaledProfile",
    "classify_limit",
    "fit_cigar",
    "gauge_scale",
    "rescaled_profile",
    "stationarity_residual",
]

"""Numerical laboratory for equivariant Lagrangian mean curvature flow reduced
to planar profile curves: soliton reconstruction, flow integration, singularity
blowup analysis, and moment-map verification of concrete group actions."""

from .curves import (
    AngleProfile,
    CurveDiagnostics,
    PlanarCurve,
    WedgeHull,
    angle_derivative_check,
    angle_mod_pi_distance,
    curvature_and_radial,
    curvature_maxima_count,
    curve_hausdorff,
    frame,
    hausdorff_distance,
    lagrangian_angle,
    redistribute,
    wedge_hull,
    winding_number,
)
from .errors import (
    DomainError,
    LmcflabError,
    MeshError,
    NoFitError,
    NumericalError,
    SingularRadiusError,
    ValidationError,
)
from .solitons import (
    SolitonSpec,
    ShootingState,
    asymptotes_of,
    find_expander,
    find_shrinker,
    grim_reaper,
    integrate_soliton,
    measure_expander_span,
    period_angle,
    sample_cone,
    sample_special_lagrangian,
    shrinker_ratio_window,
    soliton_residual,
    soliton_rhs,
    translator_deficiency,
)
from .flow import (
    FlowConfig,
    FlowState,
    FlowSummary,
    FlowTrajectory,
    Ray,
    SingularityReport,
    avoidance_check,
    classify_singularity_rate,
    estimate_singular_time,
    evolve,
    monitor_estimates,
    neves_initial,
    neves_rays,
    normal_velocity,
    step,
)
from .blowup import (
    BlowupReport,
    ConePairFit,
    NeckFit,
    analyze_blowups,
    blowdown_consistency,
    fit_cone_pair,
    fit_special_lagrangian,
    type1_rescale,
    type2_rescale,
)
from .symmetry import (
    GroupAction,
    LagrangianLift,
    MomentValue,
    OrbitFrame,
    ambient_angle_check,
    cyclic_symmetry_order,
    equivariance_residual,
    lift_lagrangian,
    moment,
    orbit_dimension,
    orthogonal_decomposition_residual,
    zero_level_and_isotropic,
)
from .presets import build_preset, load_preset_catalog, load_simple_group_table

__version__ = "0.1.0"

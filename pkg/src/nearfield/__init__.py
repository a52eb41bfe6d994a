"""Near-field to far-field transition distances for uniform linear arrays."""

from .arrays import (
    LIGHT_SPEED,
    ArrayConfig,
    DegenerateGeometryError,
    PolarPosition,
    channel_ff,
    channel_nf,
    element_distance,
    element_distances,
    steering_ff,
    steering_nf,
)
from .boundaries import (
    BoundarySet,
    CubicCoefficients,
    EnvelopeSearchPolicy,
    HorizonExceededError,
    OptimalRadius,
    Tolerances,
    boundary_set,
    epf_distance,
    l2_certification_bound,
    optimal_radius,
    phase_amp_envelope,
    rayleigh_distance,
    resolve_r_min,
    small_angle_envelope,
    spf_distance,
    sspf_distance,
)
from .link import (
    DEFAULT_BUDGET,
    LinkBudget,
    SEReport,
    channel_gain,
    nmse_bias_approx,
    nmse_lower_bound,
    se_loss,
    se_loss_worst,
    se_optimal,
    snr_mismatched,
)
from .metrics import (
    THETA_OPEN_MIN,
    AngleSearchPolicy,
    MetricSample,
    array_gain_efficiency,
    e_l2_at,
    e_l2_worst,
    e_linf_at,
    e_linf_worst,
)

__all__ = [
    "LIGHT_SPEED",
    "ArrayConfig",
    "PolarPosition",
    "DegenerateGeometryError",
    "element_distance",
    "element_distances",
    "steering_nf",
    "steering_ff",
    "channel_nf",
    "channel_ff",
    "AngleSearchPolicy",
    "MetricSample",
    "THETA_OPEN_MIN",
    "e_linf_at",
    "e_linf_worst",
    "e_l2_at",
    "e_l2_worst",
    "array_gain_efficiency",
    "LinkBudget",
    "DEFAULT_BUDGET",
    "SEReport",
    "channel_gain",
    "se_optimal",
    "snr_mismatched",
    "se_loss",
    "se_loss_worst",
    "nmse_lower_bound",
    "nmse_bias_approx",
    "Tolerances",
    "CubicCoefficients",
    "EnvelopeSearchPolicy",
    "OptimalRadius",
    "BoundarySet",
    "HorizonExceededError",
    "rayleigh_distance",
    "sspf_distance",
    "spf_distance",
    "epf_distance",
    "phase_amp_envelope",
    "small_angle_envelope",
    "l2_certification_bound",
    "optimal_radius",
    "resolve_r_min",
    "boundary_set",
]

__version__ = "0.1.0"

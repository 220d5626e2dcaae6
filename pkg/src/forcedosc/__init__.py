"""Forced polynomial oscillators ``x'' + n x^(2n-1) = sum_j p_j(t) x^j``.

Generalized trigonometric functions, the action-angle chart, the period map,
a two-stage Deprit normal form and the diagnostics that connect them.
"""
from .action_angle import (
    ActionAngleState,
    CartesianState,
    aa_gradient,
    aa_hamiltonian,
    cartesian_hamiltonian,
    from_action_angle,
    to_action_angle,
)
from .errors import (
    ChartSingularityError,
    ConstructionError,
    DomainError,
    ForcedOscError,
    IntegrationError,
    ShapeError,
    SmoothnessPolicyError,
    TruncationWarning,
    ValidationError,
)
from .flow import (
    IntegratorConfig,
    PeriodMapSample,
    integrate,
    period_map,
    period_map_arrays,
    period_map_jacobian,
    period_map_lk,
    unforced_return_time,
)
from .forcing import Forcing, minimum_smoothness, morris_forcing, zero_forcing
from .reference import GenTrig, build_gentrig, cn_eval, kappa_from_sncn, profile, quarter_period, sn_eval, sn_power_mean

__version__ = "0.1.0"

__all__ = [
    "ActionAngleState",
    "CartesianState",
    "aa_gradient",
    "aa_hamiltonian",
    "cartesian_hamiltonian",
    "from_action_angle",
    "to_action_angle",
    "ChartSingularityError",
    "ConstructionError",
    "DomainError",
    "ForcedOscError",
    "IntegrationError",
    "ShapeError",
    "SmoothnessPolicyError",
    "TruncationWarning",
    "ValidationError",
    "IntegratorConfig",
    "PeriodMapSample",
    "integrate",
    "period_map",
    "period_map_arrays",
    "period_map_jacobian",
    "period_map_lk",
    "unforced_return_time",
    "Forcing",
    "minimum_smoothness",
    "morris_forcing",
    "zero_forcing",
    "GenTrig",
    "build_gentrig",
    "cn_eval",
    "kappa_from_sncn",
    "profile",
    "quarter_period",
    "sn_eval",
    "sn_power_mean",
]

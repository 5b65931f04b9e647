"""Excitation of a two-level detector crossing a Dirichlet cavity.

Compares radial free fall through a static cavity outside a Schwarzschild
black hole with uniform acceleration through an inertial cavity in flat
spacetime, and estimates when the flat-cavity (quasi-local) treatment holds.
"""

__version__ = "0.1.0"

from .errors import AccuracyError, DomainError, TruncationError
from .numerics import (
    DEFAULT_QUADRATURE,
    QuadratureConfig,
    QuadratureResult,
    find_root,
    integrate_1d,
    integrate_levin,
    integrate_triangle,
    integrate_triangle_separable,
)
from .kinematics import (
    FreeFallWorldline,
    RindlerWorldline,
    SchwarzschildBackground,
    WorldlinePoint,
    frame_transform,
    freefall_position,
    matched_acceleration,
    rindler_position,
    theta_of_tau,
    transit_time_rindler,
    transit_time_schwarzschild,
)
from .validity import EstimatorReport, estimator, estimator_closed_form, tortoise
from .detector_response import (
    CavitySpec,
    DetectorSpec,
    ModeIntegral,
    TransitionResult,
    compute_mode_integrals,
    mode_function,
    transit_profile,
    transition_probability,
)
from .experiments import (
    SweepRow,
    SweepSpec,
    run_estimator_surface,
    run_radius_sweep,
    run_ratio_curves,
    run_transit_profile,
)

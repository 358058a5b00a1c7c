"""Capillary channel profiles between vertical parallel plates.

Library for integrating the directrix system of translationally invariant
capillary surfaces, classifying sessile/pendent morphologies, solving the
contact-angle and prescribed-volume boundary-value problems by shooting,
and numerically certifying the closed-form height/volume estimates.
"""

from .errors import (
    BracketOverflow,
    CapchanError,
    InvalidParams,
    MonotonicityViolation,
    NoEvent,
    NoRoot,
    NoSignChange,
    NotPeriodic,
    OutOfDomain,
    ToleranceNotMet,
    UnreachableAngle,
    WrongRegime,
)
from .ode import (
    Event,
    FluidParams,
    IntegratorOptions,
    IntegratorStats,
    Profile,
    ProfileState,
    SymmetryReport,
    height_squared_from_theta,
    integrate,
    symmetry_residuals,
)

__version__ = "0.1.0"

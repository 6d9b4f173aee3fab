"""Copula-based fractional inaccuracy measures, bounds and ordering checks."""

from .copulas import CopulaSpec, DerivedCopula, Family, ReflectedSurvival, Transform
from .errors import (
    CompositionError,
    CopfracError,
    DivergentIntegralError,
    DomainError,
    JobValidationError,
    ParameterError,
    SingularityError,
    UnsupportedDimensionError,
)
from .integrate import IntegralResult, IntegrationConfig, Method, integrate_unit_cube
from .margins import Exponential, PowerMode, PowerOfBase, Uniform
from .measures import MeasureJob, MeasureKind, ccfi_frechet_bounds, evaluate
from .orderings import JointModel, check_lower_orthant, check_upper_orthant, verify_proposition
from .special import FractionalOrder, eta_factorial, fractional_log_kernel, gamma, gauss_2f1

__version__ = "0.1.0"

__all__ = [
    "CopulaSpec",
    "DerivedCopula",
    "Family",
    "ReflectedSurvival",
    "Transform",
    "CompositionError",
    "CopfracError",
    "DivergentIntegralError",
    "DomainError",
    "JobValidationError",
    "ParameterError",
    "SingularityError",
    "UnsupportedDimensionError",
    "IntegralResult",
    "IntegrationConfig",
    "Method",
    "integrate_unit_cube",
    "Exponential",
    "PowerMode",
    "PowerOfBase",
    "Uniform",
    "MeasureJob",
    "MeasureKind",
    "ccfi_frechet_bounds",
    "evaluate",
    "JointModel",
    "check_lower_orthant",
    "check_upper_orthant",
    "verify_proposition",
    "FractionalOrder",
    "eta_factorial",
    "fractional_log_kernel",
    "gamma",
    "gauss_2f1",
]

"""Symmetry groups, exponent sets and covariance structure of operator fractional Brownian motion."""
from .config import DEFAULT_TOLERANCES, ToleranceConfig
from .errors import (
    CapacityError,
    DomainError,
    NumericError,
    OFBMError,
    ShapeError,
    ValidationError,
)
from .exponents import (
    CommutingExponent,
    ExponentSet,
    commuting_exponent,
    exponent_set,
    tangent_space,
)
from .params import (
    DerivedParams,
    PiFamily,
    SpectralParams,
    build_pi_family,
    derive,
    load_params,
    params_from_dict,
    params_to_dict,
    validate,
)
from .process import (
    QuadratureConfig,
    SimulationConfig,
    covariance,
    covariance_grid,
    oss_check,
    simulate,
)
from .symmetry import SymmetryClassification, classify, maximal_test, minimal_test

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_TOLERANCES", "ToleranceConfig",
    "CapacityError", "DomainError", "NumericError", "OFBMError", "ShapeError", "ValidationError",
    "CommutingExponent", "ExponentSet", "commuting_exponent", "exponent_set", "tangent_space",
    "DerivedParams", "PiFamily", "SpectralParams", "build_pi_family", "derive", "load_params",
    "params_from_dict", "params_to_dict", "validate",
    "QuadratureConfig", "SimulationConfig", "covariance", "covariance_grid", "oss_check", "simulate",
    "SymmetryClassification", "classify", "maximal_test", "minimal_test",
]

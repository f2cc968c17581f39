"""Perturbative gate synthesis for driven harmonic oscillators."""
from ._backend import BACKEND
from .errors import (
    ConfigError,
    ConstraintInfeasibleError,
    ContractViolation,
    CoverageError,
    DegenerateTargetError,
    IllConditionedError,
    InvalidInputError,
    InvalidTruncationError,
    OscgateError,
    ParameterizationError,
    RankDeficiencyError,
    ShapeError,
)

__version__ = "0.1.0"
__all__ = [
    "BACKEND", "__version__", "OscgateError", "InvalidInputError", "InvalidTruncationError", "ShapeError",
    "ContractViolation", "RankDeficiencyError", "ParameterizationError", "ConstraintInfeasibleError",
    "IllConditionedError", "DegenerateTargetError", "CoverageError", "ConfigError",
]

"""
GridComply Core Module
"""
from app.core.exceptions import (
    GridComplyException,
    NotFoundError,
    ValidationError,
    InvalidParameterError,
    BadRange,
    NotHermitian,
    NotSymmetric,
    NotRational,
    ConjugationViolation,
    OperatingPointError,
    DegenerateVoltage,
    SingularOperatingPoint,
    SingularLoad,
    NetworkError,
    DisconnectedNetwork,
    UnknownBus,
    NumericalError,
    SingularResolvent,
    NoConvergence,
    IllConditioned,
    GridHitsPole,
    ImproperInverse,
    ComplianceError,
    InsufficientKqv
)

from app.core.middleware import RequestLoggingMiddleware

__all__ = [
    # Exceptions
    "GridComplyException",
    "NotFoundError",
    "ValidationError",
    "InvalidParameterError",
    "BadRange",
    "NotHermitian",
    "NotSymmetric",
    "NotRational",
    "ConjugationViolation",
    "OperatingPointError",
    "DegenerateVoltage",
    "SingularOperatingPoint",
    "SingularLoad",
    "NetworkError",
    "DisconnectedNetwork",
    "UnknownBus",
    "NumericalError",
    "SingularResolvent",
    "NoConvergence",
    "IllConditioned",
    "GridHitsPole",
    "ImproperInverse",
    "ComplianceError",
    "InsufficientKqv",

    # Middleware
    "RequestLoggingMiddleware"
]

"""
Engine Exceptions
-----------------
Error hierarchy shared by the engine, the data layer and the CLI.

Every class carries the process exit code the CLI maps it to:
    1 → configuration / parameter problems
    2 → unreadable or malformed data
    3 → numeric failures (shapes, contracts, non-finite values)
"""


class MetaGcnError(Exception):
    """Base class for all toolkit errors."""
    exit_code: int = 3


class ConfigError(MetaGcnError):
    """Invalid experiment configuration."""
    exit_code = 1


class ParameterError(MetaGcnError, ValueError):
    """An argument is outside the range an operation accepts."""
    exit_code = 1


class UndefinedMetricError(ParameterError):
    """Metric cannot be computed for the given labels (e.g. AUC with one class)."""


class DataError(MetaGcnError):
    """Missing, unparseable or degenerate dataset file."""
    exit_code = 2


class ShapeError(MetaGcnError, ValueError):
    """Matrix dimensions do not line up."""
    exit_code = 3


class ContractViolation(MetaGcnError, ValueError):
    """Input breaks a structural precondition (symmetry, one-hot rows, ...)."""
    exit_code = 3


class NumericError(MetaGcnError, ArithmeticError):
    """NaN/Inf produced during training or matrix arithmetic."""
    exit_code = 3


__all__ = [
    "MetaGcnError",
    "ConfigError",
    "ParameterError",
    "UndefinedMetricError",
    "DataError",
    "ShapeError",
    "ContractViolation",
    "NumericError",
]

"""
Global error handling and custom exceptions.

This module defines the exception hierarchy shared by the library and the CLI,
and the table mapping each exception family to a process exit code.
"""

from typing import Any, Dict, Optional, Type

from .observability import get_logger

logger = get_logger(__name__)


EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3


class HawkesHiveException(Exception):
    """Base exception for all hawkeshive errors."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        self.message = message
        self.details = details or {}
        super().__init__(self.message)


# Usage errors
class UsageException(HawkesHiveException):
    """Raised when a command is invoked with conflicting or missing options."""


class ConfigurationException(HawkesHiveException):
    """Raised when a configuration file or parameter object is invalid."""


# Data errors
class InputException(HawkesHiveException):
    """Raised when input data violates ordering or range requirements."""


class MalformedRowException(InputException):
    """Raised when an ingested row cannot be parsed."""

    def __init__(self, message: str, line: int, details: Optional[Dict[str, Any]] = None):
        self.line = line
        super().__init__(message, {"line": line, **(details or {})})


class UnknownComponentException(InputException):
    """Raised when ingested rows carry labels absent from the component map."""


class DegenerateDataException(InputException):
    """Raised when a fit receives empty or all-empty components."""


class InsufficientDataException(InputException):
    """Raised when the record is too short for the requested statistic."""


class ModelSpecException(InputException):
    """Raised when a model specification is inconsistent or unparseable."""


class UnsupportedFamilyException(InputException):
    """Raised when an algorithm does not support the given kernel family."""


# Numerical errors
class NumericalException(HawkesHiveException):
    """Base class for numerical failures."""


class StabilityException(NumericalException):
    """Raised when a model violates the stationarity condition."""

    def __init__(self, message: str, spectral_radius: float, details: Optional[Dict[str, Any]] = None):
        self.spectral_radius = spectral_radius
        super().__init__(message, {"spectral_radius": spectral_radius, **(details or {})})


class NearCriticalityException(StabilityException):
    """Raised when a model is too close to the critical boundary for the operation."""


class ExplosionException(NumericalException):
    """Raised when a simulation exceeds the configured event cap."""

    def __init__(self, message: str, count: int, details: Optional[Dict[str, Any]] = None):
        self.count = count
        super().__init__(message, {"count": count, **(details or {})})


class DomainException(NumericalException):
    """Raised when a transform is evaluated outside its convergence region."""


class NonIntegrableKernelException(NumericalException):
    """Raised when a kernel has no finite L1 norm."""


class ConditioningException(NumericalException):
    """Raised when a discretized linear system is too ill-conditioned to solve."""

    def __init__(self, message: str, condition_number: float, details: Optional[Dict[str, Any]] = None):
        self.condition_number = condition_number
        super().__init__(message, {"condition_number": condition_number, **(details or {})})


class ResolutionException(NumericalException):
    """Raised when a numerical grid would exceed its configured maximum."""


class IdentifiabilityException(NumericalException):
    """Raised when there are fewer conditions than parameters."""


EXIT_CODES: Dict[Type[HawkesHiveException], int] = {
    UsageException: EXIT_USAGE,
    ConfigurationException: EXIT_USAGE,
    InputException: EXIT_DATA,
    NumericalException: EXIT_NUMERICAL,
}


def exit_code_for(exc: BaseException) -> int:
    """Resolve the exit code of an exception through its class hierarchy."""
    for klass in type(exc).__mro__:
        if klass in EXIT_CODES:
            return EXIT_CODES[klass]
    return EXIT_NUMERICAL if isinstance(exc, ArithmeticError) else EXIT_DATA


def handle_cli_exception(exc: HawkesHiveException, command: str) -> int:
    """Log a library exception raised under a CLI command and return its exit code."""
    code = exit_code_for(exc)
    logger.error(
        "command failed",
        command=command,
        exception=exc.__class__.__name__,
        message=exc.message,
        details=exc.details,
        exit_code=code,
    )
    return code

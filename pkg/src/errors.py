"""
Exception types raised by the receiver model.
All of them are ValueErrors so callers can catch the broad class.
"""

from typing import Optional


class ModelError(ValueError):
    """Base class for all receiver model errors."""


class InvalidEnvironmentError(ModelError):
    """The fluid environment is outside its physical range."""


class DomainError(ModelError):
    """An input lies outside the domain of an operation."""


class SingularityError(DomainError):
    """An operation was evaluated at a singular point, e.g. 1/f at f = 0."""


class UnsupportedOperationError(ModelError):
    """The configuration lacks the inputs an operation needs."""


class ConfigurationError(ModelError):
    """A run or simulation configuration is inconsistent."""


class ConfigParseError(ConfigurationError):
    """
    A configuration document could not be parsed.
    Carries the 1-based line of the offending entry when known.
    """

    def __init__(self, message: str, line: Optional[int] = None) -> None:
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InsufficientDataError(ModelError):
    """A trace is too short for the requested estimate."""

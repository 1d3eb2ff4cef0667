"""Exception types."""

from __future__ import annotations


class QdemuxError(Exception):
    """Base class of every error raised by the package."""


class ParameterError(QdemuxError, ValueError):
    """Exception raised when a parameter lies outside its domain."""


class ConfigError(QdemuxError):
    """
    Exception raised when a scenario or settings file is invalid.

    Attributes
    ----------
    issues : list[str]
        Field-level diagnostics, each formatted as ``path: message``.
    """

    def __init__(self, message: str, issues: list[str] | None = None) -> None:
        self.issues = issues or []
        if self.issues:
            message = '\n  '.join([message, *self.issues])
        super().__init__(message)


class DataError(QdemuxError):
    """Exception raised for malformed time tags or histograms."""


class NormalizationError(DataError):
    """Exception raised when a normalization area is empty."""


class FitError(QdemuxError):
    """Exception raised when a least-squares fit cannot be performed."""


__all__ = [
    'ConfigError',
    'DataError',
    'FitError',
    'NormalizationError',
    'ParameterError',
    'QdemuxError',
]

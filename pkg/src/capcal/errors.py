"""Exception types shared across the package."""

from __future__ import annotations


class CapcalError(Exception):
    """Base class for all package errors."""


class DomainError(CapcalError, ValueError):
    """An argument lies outside the domain of a model or kernel."""


class ConvergenceError(CapcalError, ArithmeticError):
    """A series or iteration failed to converge within its cap.

    The partial result is kept so callers can inspect how far it got.
    """

    def __init__(self, message: str, partial_sum: float = float("nan"), terms: int = 0):
        super().__init__(message)
        self.partial_sum = partial_sum
        self.terms = terms


class SingularMatrixError(CapcalError, ArithmeticError):
    """Design matrix is rank deficient."""

    def __init__(self, message: str, column: int | None = None):
        super().__init__(message)
        self.column = column


class ObjectiveError(CapcalError, ArithmeticError):
    """Objective function returned a non-finite value."""

    def __init__(self, message: str, x: float):
        super().__init__(message)
        self.x = x


class EmptyObjectiveError(CapcalError, ValueError):
    """Every data point was excluded from a chi-squared sum."""


class DatasetFormatError(CapcalError, ValueError):
    """Malformed dataset file; ``line`` is 1-based."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ValidityWarning(UserWarning):
    """A model is evaluated outside the range where it is accurate."""

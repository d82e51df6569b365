"""Exceptions raised by the limitset package."""
from typing import Optional

from .const import EXIT_DATA, EXIT_NUMERICAL, EXIT_USAGE


class LimitSetError(Exception):
    """Base exception for the limitset package."""

    exit_code: int = 1


class ConfigValidationError(LimitSetError):
    """Exception to indicate invalid parameters or usage."""

    exit_code = EXIT_USAGE


class DataValidationError(LimitSetError):
    """Exception to indicate input data that violates a precondition."""

    exit_code = EXIT_DATA


class NotEstimableError(LimitSetError):
    """Exception to indicate a quantity outside the estimable range."""

    exit_code = EXIT_DATA


class NumericalError(LimitSetError):
    """Exception to indicate a numerical failure."""

    exit_code = EXIT_NUMERICAL


class GpdFitError(NumericalError):
    """Exception to indicate a failed generalized Pareto fit."""


class SplineFitError(NumericalError):
    """Exception to indicate a failed spline quantile or GPD-GAM fit."""


class BetaFitError(NumericalError):
    """Exception to indicate a failed conditional-extremes fit."""


class LocalFitError(NumericalError):
    """Exception to indicate a failed GPD fit at one estimation angle."""

    def __init__(self, index: int, angle: float, reason: Optional[str] = None):
        """Initialize with the offending angle."""
        self.index = index
        self.angle = angle
        message = f"GPD fit failed at angle index {index} (w={angle:.6f})"
        if reason:
            message = f"{message}: {reason}"
        super().__init__(message)

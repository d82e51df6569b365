"""Limit-set estimation for bivariate sample clouds and the extremal dependence measures it yields."""
import logging

from .config import FitConfig
from .const import VERSION
from .copulas import CopulaSpec, sample, true_boundary, true_measures
from .errors import (
    ConfigValidationError,
    DataValidationError,
    LimitSetError,
    NotEstimableError,
    NumericalError,
)
from .local import LimitSetEstimate, estimate_local
from .margins import BivariateSample, RawSample, to_exponential_margins, to_polar
from .measures import DependenceSummary, baseline_measures, boundary_summary, summarize
from .resample import BootstrapPlan, bootstrap_measures
from .smooth import FitResult, estimate

__version__ = VERSION

_LOGGER = logging.getLogger(__name__)
_LOGGER.addHandler(logging.NullHandler())

__all__ = [
    "BivariateSample",
    "BootstrapPlan",
    "ConfigValidationError",
    "CopulaSpec",
    "DataValidationError",
    "DependenceSummary",
    "FitConfig",
    "FitResult",
    "LimitSetError",
    "LimitSetEstimate",
    "NotEstimableError",
    "NumericalError",
    "RawSample",
    "baseline_measures",
    "bootstrap_measures",
    "boundary_summary",
    "estimate",
    "estimate_local",
    "sample",
    "summarize",
    "to_exponential_margins",
    "to_polar",
    "true_boundary",
    "true_measures",
]

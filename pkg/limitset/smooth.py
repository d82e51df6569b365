"""Smoothed boundary estimates and spline-degree selection."""
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, Mapping, Optional, Tuple

import numpy as np

from .config import FitConfig
from .const import (
    ATTR_CONFIG,
    ATTR_DEGREE,
    ATTR_ETA_H,
    ATTR_FAILURES,
    ATTR_MAE,
    SOURCE_SMOOTH,
)
from .errors import NumericalError
from .local import LimitSetEstimate, LocalQuantiles, eta_for_scaling, estimate_local, scale_points
from .margins import BivariateSample, PolarSample, to_polar
from .splines import SplineSurface, empirical_coverage, fit_surface, predict_radial_quantile

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class SmoothCandidate:
    """One spline degree's boundary, surface and radial quantiles on the local grid."""

    degree: int
    boundary: LimitSetEstimate
    surface: SplineSurface
    r_hat: np.ndarray
    mask: np.ndarray


@dataclass(frozen=True)
class FitResult:
    """Everything produced by one end-to-end fit."""

    boundary: LimitSetEstimate
    local_boundary: LimitSetEstimate
    local: LocalQuantiles
    degree: int
    mae: Dict[int, float]
    candidates: Dict[int, SmoothCandidate]
    eta_h: float
    config: FitConfig
    failures: Dict[int, str] = field(default_factory=dict)

    @property
    def surfaces(self) -> Dict[int, SplineSurface]:
        """Fitted spline surfaces by degree."""
        return {degree: cand.surface for degree, cand in self.candidates.items()}

    def report(self) -> Dict[str, Any]:
        """Return a JSON-friendly fit report."""
        return {
            ATTR_DEGREE: self.degree,
            ATTR_MAE: {str(degree): value for degree, value in self.mae.items()},
            ATTR_ETA_H: self.eta_h,
            "x_star": self.boundary.x_star,
            "local_x_star": self.local_boundary.x_star,
            ATTR_CONFIG: self.config.as_dict(),
            "surfaces": {str(d): s.as_dict() for d, s in self.surfaces.items()},
            "local_fits": self.local.records(),
            ATTR_FAILURES: {str(degree): reason for degree, reason in self.failures.items()},
        }


def smooth_quantiles(
    surface: SplineSurface, angles: np.ndarray, q: float
) -> Tuple[np.ndarray, np.ndarray]:
    """Predict radial quantiles at the grid angles inside the observed range.

    Returns the quantiles and the mask of grid angles that were kept.
    """
    mask = (angles >= surface.w_min) & (angles <= surface.w_max)
    if not mask.all():
        _LOGGER.debug("Dropping %s grid angles outside the observed range", int((~mask).sum()))
    return predict_radial_quantile(surface, angles[mask], q), mask


def estimate_smooth_degree(
    sample: BivariateSample,
    config: FitConfig,
    degree: int,
    local: LocalQuantiles,
    eta_h: float,
    polar: Optional[PolarSample] = None,
) -> SmoothCandidate:
    """Fit the degree-d spline surface and scale its quantiles like the local stage."""
    polar = polar if polar is not None else to_polar(sample)
    surface = fit_surface(
        polar, degree, config.kappa, config.q_u, min_exceedances=config.min_gam_exceedances
    )
    r_hat, mask = smooth_quantiles(surface, local.angles, config.q)
    boundary = scale_points(
        r_hat, local.angles[mask], eta_h, config.scaling, SOURCE_SMOOTH.format(degree=degree)
    )
    _LOGGER.debug(
        "Degree %s surface: xi=%.4f, threshold coverage %.4f",
        degree, surface.xi, empirical_coverage(polar, surface.threshold),
    )
    return SmoothCandidate(
        degree=degree, boundary=boundary, surface=surface, r_hat=r_hat, mask=mask
    )


def absolute_error(local: LocalQuantiles, candidate: SmoothCandidate) -> float:
    """Summed absolute difference between local and smooth radial quantiles."""
    return float(np.sum(np.abs(local.r_hat[candidate.mask] - candidate.r_hat)))


def select_degree(
    local: LocalQuantiles, candidates: Mapping[int, SmoothCandidate]
) -> Tuple[int, SmoothCandidate, Dict[int, float]]:
    """Choose the degree whose quantiles are closest to the local ones; ties go to the lower."""
    if not candidates:
        raise NumericalError("No smoothed candidate is available for degree selection")
    errors = {degree: absolute_error(local, cand) for degree, cand in sorted(candidates.items())}
    chosen = min(errors, key=lambda degree: (errors[degree], degree))
    return chosen, candidates[chosen], errors


def _fit_degree(
    sample: BivariateSample,
    config: FitConfig,
    degree: int,
    local: LocalQuantiles,
    eta_h: float,
    polar: PolarSample,
) -> Tuple[int, Optional[SmoothCandidate], Optional[str]]:
    try:
        return degree, estimate_smooth_degree(sample, config, degree, local, eta_h, polar), None
    except NumericalError as err:
        return degree, None, str(err)


def estimate(
    sample: BivariateSample, config: Optional[FitConfig] = None, threads: int = 1
) -> FitResult:
    """Estimate the boundary set: local stage, smoothed candidates, degree selection.

    With ``threads`` above one the spline degrees are fitted in worker processes;
    the result does not depend on it.
    """
    config = config or FitConfig()
    polar = to_polar(sample)
    eta_h = eta_for_scaling(sample, config)
    local_boundary, local = estimate_local(sample, config, eta_h=eta_h)

    args = [(sample, config, degree, local, eta_h, polar) for degree in config.degrees]
    if threads > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=min(threads, len(args))) as executor:
            outcomes = list(executor.map(_fit_degree, *zip(*args)))
    else:
        outcomes = [_fit_degree(*arg) for arg in args]

    candidates: Dict[int, SmoothCandidate] = {}
    failures: Dict[int, str] = {}
    for degree, candidate, error in outcomes:
        if error is not None:
            _LOGGER.warning("Spline degree %s failed: %s", degree, error)
            failures[degree] = error
            continue
        candidates[degree] = candidate
    if not candidates:
        raise NumericalError(f"Every spline degree failed: {failures}")

    degree, chosen, errors = select_degree(local, candidates)
    _LOGGER.info(
        "Selected spline degree %s (absolute errors %s)",
        degree, ", ".join(f"{d}: {e:.2f}" for d, e in errors.items()),
    )
    return FitResult(
        boundary=chosen.boundary,
        local_boundary=local_boundary,
        local=local,
        degree=degree,
        mae=errors,
        candidates=candidates,
        eta_h=eta_h,
        config=config,
        failures=failures,
    )

"""Per-angle radial quantiles and the scaled local boundary estimate."""
import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .config import FitConfig
from .const import SCALING_NAIVE, SOURCE_LOCAL
from .errors import ConfigValidationError, DataValidationError, GpdFitError, LocalFitError
from .gpd import GpdFit, fit_tail, radial_quantile
from .margins import BivariateSample, PolarSample, from_polar, to_polar
from .measures import hill_eta

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class AngleGrid:
    """Estimation angles, sorted ascending and always containing 1/2."""

    angles: np.ndarray

    @property
    def k(self) -> int:
        """Number of estimation angles."""
        return self.angles.size


@dataclass(frozen=True)
class LocalQuantiles:
    """Threshold model and extrapolated radial quantile at each estimation angle."""

    angles: np.ndarray
    epsilon: np.ndarray
    u: np.ndarray
    sigma: np.ndarray
    xi: np.ndarray
    r_hat: np.ndarray
    m: int
    q_u: float
    q: float

    def records(self) -> List[Dict[str, Any]]:
        """Return one dictionary per angle."""
        return [
            {
                "index": j,
                "w": float(self.angles[j]),
                "epsilon": float(self.epsilon[j]),
                "m": self.m,
                "u": float(self.u[j]),
                "sigma": float(self.sigma[j]),
                "xi": float(self.xi[j]),
                "r_q": float(self.r_hat[j]),
            }
            for j in range(self.angles.size)
        ]


@dataclass(frozen=True)
class LimitSetEstimate:
    """Boundary points (w, x1, x2) in the unit square with their provenance."""

    angles: np.ndarray
    points: np.ndarray
    x_star: float
    source: str
    eta_h: Optional[float] = None

    @property
    def x1(self) -> np.ndarray:
        """First coordinates."""
        return self.points[:, 0]

    @property
    def x2(self) -> np.ndarray:
        """Second coordinates."""
        return self.points[:, 1]


def select_angles(polar: PolarSample, k: int) -> AngleGrid:
    """Take k - 1 evenly spaced empirical quantiles of the angles, then add 1/2."""
    if k % 2 == 0:
        raise ConfigValidationError(f"Number of estimation angles must be odd, got {k}")
    if not 3 <= k <= polar.n:
        raise ConfigValidationError(
            f"Number of estimation angles must lie in [3, {polar.n}], got {k}"
        )
    probs = np.linspace(0.0, 1.0, k - 1)
    angles = np.sort(np.append(np.quantile(polar.w, probs), 0.5))
    return AngleGrid(angles=angles)


def local_quantiles(
    polar: PolarSample,
    grid: AngleGrid,
    m: int,
    q_u: float,
    q: float,
    min_excesses: int = 10,
) -> LocalQuantiles:
    """Fit a threshold model to the m angular nearest neighbours of each grid angle."""
    if m > polar.n:
        raise ConfigValidationError(f"Neighbourhood size {m} exceeds sample size {polar.n}")
    if q_u >= q:
        raise ConfigValidationError(f"Threshold level {q_u} must be below quantile level {q}")

    k = grid.k
    epsilon = np.empty(k)
    fits: List[GpdFit] = []
    cache: Dict[bytes, GpdFit] = {}
    for j, angle in enumerate(grid.angles):
        distance = np.abs(polar.w - angle)
        # stable sort breaks distance ties by row order
        neighbours = np.argsort(distance, kind="stable")[:m]
        epsilon[j] = distance[neighbours[-1]]
        key = np.sort(neighbours).tobytes()
        fit = cache.get(key)
        if fit is None:
            try:
                fit = fit_tail(polar.r[neighbours], q_u, min_excesses=min_excesses)
            except GpdFitError as err:
                raise LocalFitError(j, float(angle), str(err)) from err
            cache[key] = fit
        _LOGGER.debug(
            "Angle %s (w=%.4f): u=%.4f sigma=%.4f xi=%.4f",
            j, angle, fit.u, fit.sigma, fit.xi,
        )
        fits.append(fit)

    if len(cache) < k:
        _LOGGER.debug("Reused %s of %s neighbourhood fits", k - len(cache), k)
    return LocalQuantiles(
        angles=grid.angles,
        epsilon=epsilon,
        u=np.array([fit.u for fit in fits]),
        sigma=np.array([fit.sigma for fit in fits]),
        xi=np.array([fit.xi for fit in fits]),
        r_hat=np.array([radial_quantile(fit, q) for fit in fits]),
        m=m,
        q_u=q_u,
        q=q,
    )


def _checked_points(tilde_points: np.ndarray) -> np.ndarray:
    points = np.array(tilde_points, dtype=float)
    if points.ndim != 2 or points.shape[1] != 2 or points.shape[0] == 0:
        raise DataValidationError("Boundary points must form a non-empty (k, 2) array")
    if not np.isfinite(points).all() or np.any(points < 0):
        raise DataValidationError("Boundary points must be finite and non-negative")
    return points


def scale_truncate(
    tilde_points: np.ndarray,
    eta_h: float,
    angles: Optional[np.ndarray] = None,
    source: str = SOURCE_LOCAL,
) -> LimitSetEstimate:
    """Map raw quantile points into the unit square anchored on eta_h.

    Step 1 scales every point so the largest componentwise minimum equals
    eta_h. Step 2 then handles each coordinate separately: one whose maximum
    reaches 1 is truncated at 1, any other is divided by its maximum.
    """
    points = _checked_points(tilde_points)
    largest_min = points.min(axis=1).max()
    if largest_min <= 0:
        raise DataValidationError("Every point lies on an axis; scaling is undefined")
    x_star = eta_h / largest_min
    points = points * x_star
    for i in range(2):
        top = points[:, i].max()
        if top >= 1:
            points[:, i] = np.minimum(points[:, i], 1.0)
        else:
            points[:, i] = points[:, i] / top
    return LimitSetEstimate(
        angles=_angles_or_index(angles, points),
        points=points,
        x_star=float(x_star),
        source=source,
        eta_h=float(eta_h),
    )


def naive_scale(
    tilde_points: np.ndarray,
    angles: Optional[np.ndarray] = None,
    source: str = SOURCE_LOCAL,
    eta_h: Optional[float] = None,
) -> LimitSetEstimate:
    """Divide each coordinate by its maximum."""
    points = _checked_points(tilde_points)
    top = points.max(axis=0)
    if np.any(top <= 0):
        raise DataValidationError("A coordinate is zero at every point; scaling is undefined")
    return LimitSetEstimate(
        angles=_angles_or_index(angles, points),
        points=points / top,
        x_star=float("nan"),
        source=source,
        eta_h=eta_h,
    )


def _angles_or_index(angles: Optional[np.ndarray], points: np.ndarray) -> np.ndarray:
    if angles is None:
        total = points.sum(axis=1)
        return np.divide(points[:, 0], total, out=np.full(total.shape, 0.5), where=total > 0)
    return np.asarray(angles, dtype=float)


def scale_points(
    r_hat: np.ndarray, angles: np.ndarray, eta_h: float, scaling: str, source: str
) -> LimitSetEstimate:
    """Back-transform radial quantiles to Cartesian points and scale them."""
    x1, x2 = from_polar(np.asarray(r_hat), np.asarray(angles))
    tilde = np.column_stack([x1, x2])
    if scaling == SCALING_NAIVE:
        return naive_scale(tilde, angles=angles, source=source, eta_h=eta_h)
    return scale_truncate(tilde, eta_h, angles=angles, source=source)


def eta_for_scaling(sample: BivariateSample, config: FitConfig) -> float:
    """Hill estimate of eta used to anchor the scaling, clamped to (0, 1]."""
    n_exceed = min(config.eta_exceedances, sample.n - 1)
    if n_exceed < config.eta_exceedances:
        _LOGGER.warning(
            "Only %s observations; using %s exceedances for the Hill estimate of eta",
            sample.n, n_exceed,
        )
    return hill_eta(sample, n_exceed)


def estimate_local(
    sample: BivariateSample,
    config: Optional[FitConfig] = None,
    eta_h: Optional[float] = None,
) -> Tuple[LimitSetEstimate, LocalQuantiles]:
    """Run the local pipeline and return the scaled boundary with its per-angle fits."""
    config = config or FitConfig()
    polar = to_polar(sample)
    grid = select_angles(polar, config.k)
    local = local_quantiles(
        polar, grid, config.m, config.q_u, config.q, min_excesses=config.min_gpd_excesses
    )
    if eta_h is None:
        eta_h = eta_for_scaling(sample, config)
    boundary = scale_points(local.r_hat, grid.angles, eta_h, config.scaling, SOURCE_LOCAL)
    _LOGGER.info(
        "Local boundary estimated at %s angles (eta_H=%.4f, x*=%.4f)",
        grid.k, eta_h, boundary.x_star,
    )
    return boundary, local

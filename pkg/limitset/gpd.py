"""Generalized Pareto threshold-excess model."""
import logging
from dataclasses import asdict, dataclass
from typing import Dict, NamedTuple, Optional, Sequence, Union

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit, logit
from scipy.stats import genpareto

from .const import DEFAULT_MIN_GPD_EXCESSES, XI_LOWER, XI_TOL, XI_UPPER
from .errors import DataValidationError, GpdFitError, NotEstimableError

_LOGGER = logging.getLogger(__name__)

Number = Union[float, np.ndarray]


@dataclass(frozen=True)
class GpdFit:
    """Threshold, GPD parameters and exceedance rate for one radial tail."""

    u: float
    sigma: float
    xi: float
    zeta: float

    def __post_init__(self):
        """Validate the parameters."""
        if not self.sigma > 0:
            raise GpdFitError(f"GPD scale must be positive, got {self.sigma}")
        if not XI_LOWER < self.xi < XI_UPPER:
            raise GpdFitError(
                f"GPD shape must lie in ({XI_LOWER}, {XI_UPPER}), got {self.xi}"
            )
        if not 0 < self.zeta < 1:
            raise DataValidationError(f"Exceedance rate must lie in (0, 1), got {self.zeta}")

    def as_dict(self) -> Dict[str, float]:
        """Return the parameters as a dictionary."""
        return asdict(self)


class GpdMle(NamedTuple):
    """Maximum likelihood estimate of the GPD parameters."""

    sigma: float
    xi: float
    loglik: float


def xi_from_unconstrained(theta: Number) -> Number:
    """Map a real number onto the admissible shape interval."""
    return XI_LOWER + (XI_UPPER - XI_LOWER) * expit(theta)


def xi_to_unconstrained(xi: Number) -> Number:
    """Inverse of xi_from_unconstrained."""
    return logit((np.asarray(xi) - XI_LOWER) / (XI_UPPER - XI_LOWER))


def gpd_cdf(fit: GpdFit, r: Number) -> Number:
    """Return Pr(R <= r | R > u) under the fitted GPD."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= fit.u):
        raise DataValidationError(f"GPD distribution function needs r > u = {fit.u}")
    value = genpareto.cdf(r - fit.u, c=fit.xi, scale=fit.sigma)
    return value[()] if np.ndim(value) == 0 else value


def radial_quantile(fit: GpdFit, q: Number) -> Number:
    """Return the unconditional q-quantile of R implied by the threshold model."""
    q = np.asarray(q, dtype=float)
    if np.any((1.0 - q) - fit.zeta > 1e-12):
        raise NotEstimableError(
            f"Quantile level {q} lies below the threshold (exceedance rate {fit.zeta})"
        )
    return tail_quantile(fit.u, fit.sigma, fit.xi, fit.zeta, q)


def tail_quantile(u: Number, sigma: Number, xi: float, zeta: float, q: Number) -> Number:
    """Evaluate u + sigma/xi [{zeta/(1-q)}**xi - 1], or its xi -> 0 limit."""
    log_ratio = np.log(zeta) - np.log1p(-np.asarray(q, dtype=float))
    if abs(xi) <= XI_TOL:
        value = u + sigma * log_ratio
    else:
        value = u + sigma / xi * np.expm1(xi * log_ratio)
    return value[()] if np.ndim(value) == 0 else value


def gpd_loglik(excesses: np.ndarray, sigma: float, xi: float) -> float:
    """Return the GPD log-likelihood, or -inf outside the support."""
    if not sigma > 0:
        return -np.inf
    value = float(genpareto.logpdf(np.asarray(excesses, dtype=float), c=xi, scale=sigma).sum())
    return value if np.isfinite(value) else -np.inf


def fit_gpd_mle(
    excesses: Sequence[float], min_excesses: int = DEFAULT_MIN_GPD_EXCESSES
) -> GpdMle:
    """Fit the GPD to positive excesses by maximum likelihood.

    The shape is constrained to (-0.95, 1) through a logistic reparameterization
    and the scale is optimized on the log scale. Excesses are standardized by
    their mean before fitting, which makes the estimate exactly scale
    equivariant.
    """
    y = np.asarray(excesses, dtype=float)
    if y.size < min_excesses:
        raise GpdFitError(f"GPD fit needs at least {min_excesses} excesses, got {y.size}")
    if np.any(y <= 0) or not np.isfinite(y).all():
        raise GpdFitError("GPD excesses must be positive and finite")
    if np.ptp(y) == 0:
        _LOGGER.warning("Degenerate GPD sample: all %s excesses equal %s", y.size, y[0])
        raise GpdFitError("Degenerate GPD sample: all excesses are equal")

    scale = y.mean()
    z = y / scale

    def objective(params: np.ndarray) -> float:
        value = -gpd_loglik(z, np.exp(params[0]), float(xi_from_unconstrained(params[1])))
        return value if np.isfinite(value) else np.inf

    start = np.array([0.0, float(xi_to_unconstrained(0.0))])
    result = minimize(
        objective,
        start,
        method="Nelder-Mead",
        options={"xatol": 1e-9, "fatol": 1e-10 * y.size, "maxiter": 5000, "maxfev": 10000},
    )
    if not result.success or not np.isfinite(result.fun):
        _LOGGER.debug("Nelder-Mead failed (%s); retrying with Powell", result.message)
        result = minimize(objective, start, method="Powell", options={"xtol": 1e-9, "ftol": 1e-12})
        if not result.success or not np.isfinite(result.fun):
            raise GpdFitError(
                f"GPD likelihood optimization did not converge after {result.nfev} "
                f"evaluations: {result.message}"
            )

    sigma = float(np.exp(result.x[0]) * scale)
    xi = float(xi_from_unconstrained(result.x[1]))
    loglik = float(-result.fun - y.size * np.log(scale))
    if xi - XI_LOWER < 1e-3:
        _LOGGER.warning("GPD shape estimate %.4f is pinned at the lower constraint", xi)
    return GpdMle(sigma=sigma, xi=xi, loglik=loglik)


def fit_tail(
    radii: np.ndarray,
    q_u: float,
    min_excesses: int = DEFAULT_MIN_GPD_EXCESSES,
    zeta: Optional[float] = None,
) -> GpdFit:
    """Fit a threshold model to radii: empirical q_u threshold plus GPD on strict excesses."""
    radii = np.asarray(radii, dtype=float)
    u = float(np.quantile(radii, q_u))
    excesses = radii[radii > u] - u
    mle = fit_gpd_mle(excesses, min_excesses=min_excesses)
    return GpdFit(u=u, sigma=mle.sigma, xi=mle.xi, zeta=1.0 - q_u if zeta is None else zeta)

"""Copula simulators, gauge functions and closed-form dependence oracles."""
import logging
from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence, Union

import numpy as np
from scipy.special import log_ndtr
from scipy.stats import levy_stable

from .config import COPULA_SCHEMA, grid_or_default, validate_input
from .const import (
    CONF_FAMILY,
    CONF_GAMMA,
    CONF_RHO,
    CONF_THETA1,
    CONF_THETA2,
    FAMILY_ASYMMETRIC_LOGISTIC,
    FAMILY_GAUSSIAN,
    FAMILY_INVERTED_LOGISTIC,
    FAMILY_LOGISTIC,
)
from .errors import ConfigValidationError
from .margins import BivariateSample, from_polar
from .measures import DependenceSummary, boundary_summary

_LOGGER = logging.getLogger(__name__)

Number = Union[float, np.ndarray]


@dataclass(frozen=True)
class CopulaSpec:
    """A copula family and its parameters."""

    family: str
    rho: Optional[float] = None
    gamma: Optional[float] = None
    theta1: Optional[float] = None
    theta2: Optional[float] = None

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CopulaSpec":
        """Build a validated specification from user input."""
        valid = validate_input(COPULA_SCHEMA, data)
        return cls(
            family=valid[CONF_FAMILY],
            rho=valid.get(CONF_RHO),
            gamma=valid.get(CONF_GAMMA),
            theta1=valid.get(CONF_THETA1),
            theta2=valid.get(CONF_THETA2),
        )

    def as_dict(self) -> Dict[str, Any]:
        """Return the family and the parameters it uses."""
        data: Dict[str, Any] = {CONF_FAMILY: self.family}
        if self.family == FAMILY_GAUSSIAN:
            data[CONF_RHO] = self.rho
        else:
            data[CONF_GAMMA] = self.gamma
        if self.family == FAMILY_ASYMMETRIC_LOGISTIC:
            data[CONF_THETA1] = self.theta1
            data[CONF_THETA2] = self.theta2
        return data

    @property
    def label(self) -> str:
        """Short human-readable name such as 'logistic(gamma=0.5)'."""
        params = ",".join(
            f"{key}={value:g}" for key, value in self.as_dict().items() if key != CONF_FAMILY
        )
        return f"{self.family}({params})"


def _positive_stable(rng: np.random.Generator, gamma: float, n: int) -> np.ndarray:
    """Draw positive stable variables with Laplace transform exp(-t**gamma)."""
    scale = np.cos(np.pi * gamma / 2.0) ** (1.0 / gamma)
    s = levy_stable.rvs(gamma, 1.0, loc=0.0, scale=scale, size=n, random_state=rng)
    # totally skewed with index below 1: support is (0, inf)
    return np.maximum(s, np.finfo(float).tiny)


def _logistic_survival_scale(rng: np.random.Generator, gamma: float, n: int) -> np.ndarray:
    """Draw pairs with joint survivor exp{-(t1**(1/gamma) + t2**(1/gamma))**gamma}."""
    s = _positive_stable(rng, gamma, n)
    e = rng.exponential(size=(n, 2))
    return (e / s[:, None]) ** gamma


def _survival_to_exponential(t: np.ndarray) -> np.ndarray:
    """Map exponential variables T to X = -log(1 - exp(-T))."""
    return -np.log(-np.expm1(-t))


def sample(spec: CopulaSpec, n: int, seed: int) -> BivariateSample:
    """Draw n observations from the copula on exact exponential margins."""
    if n < 1:
        raise ConfigValidationError("Sample size must be at least 1")
    rng = np.random.default_rng(seed)
    if spec.family == FAMILY_GAUSSIAN:
        z = rng.standard_normal(size=(n, 2))
        z[:, 1] = spec.rho * z[:, 0] + np.sqrt(1.0 - spec.rho**2) * z[:, 1]
        # -log(1 - Phi(z)) without cancellation
        x = -log_ndtr(-z)
    elif spec.family == FAMILY_LOGISTIC:
        x = _survival_to_exponential(_logistic_survival_scale(rng, spec.gamma, n))
    elif spec.family == FAMILY_INVERTED_LOGISTIC:
        x = _logistic_survival_scale(rng, spec.gamma, n)
    elif spec.family == FAMILY_ASYMMETRIC_LOGISTIC:
        theta = np.array([spec.theta1, spec.theta2])
        dependent = _logistic_survival_scale(rng, spec.gamma, n) / (1.0 - theta)
        independent = rng.exponential(size=(n, 2)) / theta
        # reciprocal of the unit Frechet maximum over both components
        x = _survival_to_exponential(np.minimum(dependent, independent))
    else:
        raise ConfigValidationError(f"Unknown copula family: {spec.family}")
    _LOGGER.debug("Simulated %s observations from %s with seed %s", n, spec.label, seed)
    return BivariateSample(x)


def _logistic_gauge(x1: Number, x2: Number, gamma: float) -> Number:
    high = np.maximum(x1, x2)
    low = np.minimum(x1, x2)
    return high / gamma - (1.0 / gamma - 1.0) * low


def gauge(spec: CopulaSpec, x1: Number, x2: Number) -> Number:
    """Evaluate the gauge function of the copula at (x1, x2)."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    if spec.family == FAMILY_GAUSSIAN:
        if spec.rho == 0:
            value = x1 + x2
        else:
            value = (x1 + x2 - 2.0 * spec.rho * np.sqrt(x1 * x2)) / (1.0 - spec.rho**2)
    elif spec.family == FAMILY_INVERTED_LOGISTIC:
        value = (x1 ** (1.0 / spec.gamma) + x2 ** (1.0 / spec.gamma)) ** spec.gamma
    elif spec.family == FAMILY_LOGISTIC:
        value = _logistic_gauge(x1, x2, spec.gamma)
    else:
        # independent of theta1 and theta2 on (0, 1)
        value = np.minimum(x1 + x2, _logistic_gauge(x1, x2, spec.gamma))
    return value[()] if np.ndim(value) == 0 else value


@dataclass(frozen=True)
class TrueBoundary:
    """The analytic boundary set on an angular grid."""

    w: np.ndarray
    r: np.ndarray

    @property
    def points(self) -> np.ndarray:
        """Boundary points as an (n, 2) array."""
        x1, x2 = from_polar(self.r, self.w)
        return np.column_stack([x1, x2])


def true_boundary(spec: CopulaSpec, grid_size: int) -> TrueBoundary:
    """Evaluate r(w) = 1 / g(w, 1 - w) on an even grid over [0, 1] that contains 1/2."""
    if grid_size < 3:
        raise ConfigValidationError("Boundary grid needs at least 3 angles")
    w = np.linspace(0.0, 1.0, grid_size)
    if not np.any(w == 0.5):
        w = np.sort(np.append(w, 0.5))
    r = 1.0 / gauge(spec, w, 1.0 - w)
    return TrueBoundary(w=w, r=r)


def boundary_measures(
    spec: CopulaSpec,
    grid_size: int,
    omega_grid: Optional[Sequence[float]] = None,
    delta_grid: Optional[Sequence[float]] = None,
) -> DependenceSummary:
    """Measure the analytic boundary sampled at grid_size angles.

    The unit peak of a coordinate may fall between two angles, so the reach
    check on alpha allows one grid step.
    """
    boundary = true_boundary(spec, grid_size)
    return boundary_summary(
        boundary.points,
        grid_or_default(omega_grid),
        grid_or_default(delta_grid),
        source=f"grid:{spec.label}",
        tol=1.0 / (grid_size - 1),
    )


def true_chi(spec: CopulaSpec) -> float:
    """Return the limiting conditional exceedance probability chi."""
    if spec.family == FAMILY_LOGISTIC:
        return 2.0 - 2.0**spec.gamma
    if spec.family == FAMILY_ASYMMETRIC_LOGISTIC:
        dependent = (
            (1.0 - spec.theta1) ** (1.0 / spec.gamma) + (1.0 - spec.theta2) ** (1.0 / spec.gamma)
        ) ** spec.gamma
        return 2.0 - spec.theta1 - spec.theta2 - dependent
    return 0.0


def _true_lambda(spec: CopulaSpec, omega: np.ndarray) -> np.ndarray:
    floor = np.maximum(omega, 1.0 - omega)
    if spec.family == FAMILY_GAUSSIAN:
        rho = spec.rho
        t_omega = np.minimum(omega, 1.0 - omega) / floor
        curved = (1.0 - 2.0 * rho * np.sqrt(omega * (1.0 - omega))) / (1.0 - rho**2)
        return np.where(t_omega >= rho**2, curved, floor)
    if spec.family == FAMILY_INVERTED_LOGISTIC:
        g = spec.gamma
        return (omega ** (1.0 / g) + (1.0 - omega) ** (1.0 / g)) ** g
    return floor


def _true_tau(spec: CopulaSpec, delta: np.ndarray) -> np.ndarray:
    if spec.family == FAMILY_GAUSSIAN:
        rho = spec.rho
        below = (1.0 - rho**2) / (1.0 + delta - 2.0 * rho * np.sqrt(delta))
        return np.where(delta >= rho**2, 1.0, below)
    if spec.family == FAMILY_LOGISTIC:
        g = spec.gamma
        return g / (1.0 + g * delta - delta)
    return np.ones_like(delta)


def true_measures(
    spec: CopulaSpec,
    omega_grid: Optional[Sequence[float]] = None,
    delta_grid: Optional[Sequence[float]] = None,
) -> DependenceSummary:
    """Return the closed-form dependence measures of the copula."""
    omega = grid_or_default(omega_grid)
    delta = grid_or_default(delta_grid)
    if spec.family == FAMILY_GAUSSIAN:
        eta = (1.0 + spec.rho) / 2.0
        alpha = spec.rho**2
        beta = 0.5 if spec.rho > 0 else 0.0
    elif spec.family == FAMILY_INVERTED_LOGISTIC:
        eta = 2.0 ** (-spec.gamma)
        alpha = 0.0
        beta = 1.0 - spec.gamma
    else:
        eta, alpha, beta = 1.0, 1.0, 0.0
    tau = _true_tau(spec, delta)
    return DependenceSummary(
        eta=eta,
        omega_grid=omega,
        lambda_values=_true_lambda(spec, omega),
        delta_grid=delta,
        tau1=tau,
        tau2=tau.copy(),
        alpha1=alpha,
        alpha2=alpha,
        beta1=beta,
        beta2=beta,
        chi=true_chi(spec),
        source=f"true:{spec.label}",
    )


def empirical_chi(sample: BivariateSample, level: float) -> float:
    """Estimate Pr(X2 > u | X1 > u) at the exponential level-quantile u."""
    u = -np.log1p(-level)
    above = sample.x1 > u
    if not above.any():
        return float("nan")
    return float(np.mean(sample.x2[above] > u))

"""B-spline bases, threshold quantile regression and the spline GPD surface."""
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np
from scipy import sparse
from scipy.interpolate import BSpline
from scipy.optimize import linprog, minimize
from scipy.stats import genpareto

from .const import DEFAULT_MIN_GAM_EXCEEDANCES, XI_LOWER, XI_TOL, XI_UPPER
from .errors import ConfigValidationError, NotEstimableError, SplineFitError
from .gpd import fit_gpd_mle, tail_quantile
from .margins import PolarSample

_LOGGER = logging.getLogger(__name__)

Number = Union[float, np.ndarray]

# L-BFGS-B box for the shape, kept off the open-interval ends
_XI_BOUNDS = (XI_LOWER + 1e-6, XI_UPPER - 1e-6)


@dataclass(frozen=True)
class SplineBasis:
    """Clamped B-spline basis on [0, 1]."""

    degree: int
    interior_knots: Tuple[float, ...]

    def __post_init__(self):
        """Validate the knot sequence."""
        knots = np.asarray(self.interior_knots, dtype=float)
        if self.degree not in (1, 2, 3):
            raise ConfigValidationError(f"Spline degree must be 1, 2 or 3, got {self.degree}")
        if np.any(np.diff(knots) <= 0) or np.any((knots <= 0) | (knots >= 1)):
            raise ConfigValidationError("Interior knots must be strictly increasing within (0, 1)")

    @property
    def knots(self) -> np.ndarray:
        """Full knot vector with exterior knots repeated at 0 and 1."""
        d = self.degree
        return np.concatenate([np.zeros(d + 1), self.interior_knots, np.ones(d + 1)])

    @property
    def dimension(self) -> int:
        """Number of basis functions."""
        return len(self.interior_knots) + self.degree + 1

    def design_matrix(self, w: Number) -> sparse.csr_matrix:
        """Return the sparse basis matrix evaluated at the angles w."""
        w = np.atleast_1d(np.asarray(w, dtype=float))
        if np.any((w < 0) | (w > 1)):
            raise NotEstimableError("Spline basis is defined on [0, 1] only")
        return BSpline.design_matrix(w, self.knots, self.degree).tocsr()

    def evaluate(self, w: Number) -> np.ndarray:
        """Return the dense basis matrix evaluated at the angles w."""
        return self.design_matrix(w).toarray()


def build_basis(degree: int, kappa: int, w_min: float, w_max: float) -> SplineBasis:
    """Place kappa knots evenly over [w_min, w_max] with the central one moved to 1/2.

    Knots falling on the clamped ends 0 or 1 are absorbed by the exterior knots.
    """
    if kappa < degree + 1:
        raise ConfigValidationError(
            f"A degree-{degree} basis needs at least {degree + 1} knots, got {kappa}"
        )
    knots = np.linspace(w_min, w_max, kappa)
    knots[np.argmin(np.abs(knots - 0.5))] = 0.5
    knots = np.unique(knots[(knots > 0) & (knots < 1)])
    return SplineBasis(degree=degree, interior_knots=tuple(float(k) for k in knots))


def pinball_loss(residuals: np.ndarray, q: float) -> float:
    """Return the summed check loss of the residuals at level q."""
    residuals = np.asarray(residuals, dtype=float)
    return float(np.sum(np.where(residuals >= 0, q * residuals, (q - 1.0) * residuals)))


@dataclass(frozen=True)
class ThresholdCurve:
    """Angular threshold u(w) = exp{B(w) beta} from quantile regression on log R."""

    basis: SplineBasis
    coef: np.ndarray
    q_u: float

    def log_threshold(self, w: Number) -> np.ndarray:
        """Return log u(w)."""
        return self.basis.design_matrix(w) @ self.coef

    def __call__(self, w: Number) -> np.ndarray:
        """Return u(w)."""
        return np.exp(self.log_threshold(w))


def fit_threshold_quantile(polar: PolarSample, basis: SplineBasis, q_u: float) -> ThresholdCurve:
    """Fit the q_u-quantile of log R as a spline in w by linear programming."""
    if polar.n == 0:
        raise SplineFitError("Cannot fit a threshold curve to an empty sample")
    if not 0 < q_u < 1:
        raise ConfigValidationError(f"Threshold level must lie in (0, 1), got {q_u}")
    design = basis.design_matrix(polar.w)
    y = np.log(polar.r)
    n, p = design.shape
    identity = sparse.identity(n, format="csr")
    a_eq = sparse.hstack([design, identity, -identity], format="csr")
    cost = np.concatenate([np.zeros(p), np.full(n, q_u), np.full(n, 1.0 - q_u)])
    bounds = [(None, None)] * p + [(0, None)] * (2 * n)
    result = linprog(cost, A_eq=a_eq, b_eq=y, bounds=bounds, method="highs")
    if result.status != 0:
        raise SplineFitError(f"Threshold quantile regression failed: {result.message}")
    coef = np.asarray(result.x[:p])
    _LOGGER.debug(
        "Threshold quantile regression (degree %s): check loss %.6g",
        basis.degree,
        result.fun,
    )
    return ThresholdCurve(basis=basis, coef=coef, q_u=q_u)


def _gam_objective(
    params: np.ndarray, design: np.ndarray, y: np.ndarray
) -> Tuple[float, np.ndarray]:
    """Negative GPD log-likelihood with log sigma_i = design_i . coef and its gradient."""
    coef, xi = params[:-1], params[-1]
    eta = design @ coef
    z = y * np.exp(-eta)
    nll = -float(genpareto.logpdf(y, c=xi, scale=np.exp(eta)).sum())
    if not np.isfinite(nll) or not np.all(np.isfinite(z)):
        return np.inf, np.zeros_like(params)
    if abs(xi) <= XI_TOL:
        d_eta = 1.0 - z
        d_xi = float(np.sum(z - 0.5 * z**2))
    else:
        t = 1.0 + xi * z
        log_t = np.log1p(xi * z)
        d_eta = 1.0 - (1.0 + xi) * z / t
        d_xi = float(np.sum(-log_t / xi**2 + (1.0 + 1.0 / xi) * z / t))
    gradient = np.append(design.T @ d_eta, d_xi)
    return nll, gradient


@dataclass(frozen=True)
class SplineSurface:
    """Smooth threshold, log-scale spline and constant shape over the angles."""

    basis: SplineBasis
    threshold: ThresholdCurve
    log_scale_coef: np.ndarray
    xi: float
    q_u: float
    w_min: float
    w_max: float
    loglik: float
    n_exceedances: int
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    def sigma(self, w: Number) -> np.ndarray:
        """Return the GPD scale sigma(w)."""
        return np.exp(self.basis.design_matrix(w) @ self.log_scale_coef)

    def as_dict(self) -> Dict[str, Any]:
        """Return a JSON-friendly description of the surface."""
        return {
            "degree": self.basis.degree,
            "interior_knots": list(self.basis.interior_knots),
            "threshold_coef": self.threshold.coef.tolist(),
            "log_scale_coef": self.log_scale_coef.tolist(),
            "xi": self.xi,
            "q_u": self.q_u,
            "w_min": self.w_min,
            "w_max": self.w_max,
            "loglik": self.loglik,
            "n_exceedances": self.n_exceedances,
        }


def fit_gpd_gam(
    polar: PolarSample,
    threshold: ThresholdCurve,
    basis: SplineBasis,
    min_exceedances: int = DEFAULT_MIN_GAM_EXCEEDANCES,
) -> SplineSurface:
    """Fit log sigma(w) as a spline and a constant shape to the strict exceedances of u(w).

    The optimizer starts from the constant-scale fit, so the returned
    likelihood is never below that of the constant-scale model.
    """
    u = threshold(polar.w)
    above = polar.r > u
    count = int(above.sum())
    if count < min_exceedances:
        raise SplineFitError(
            f"GPD spline fit needs at least {min_exceedances} exceedances, got {count}"
        )
    y = polar.r[above] - u[above]
    design = basis.evaluate(polar.w[above])

    constant = fit_gpd_mle(y, min_excesses=min_exceedances)
    xi_start = float(np.clip(constant.xi, *_XI_BOUNDS))
    start = np.append(np.full(basis.dimension, np.log(constant.sigma)), xi_start)
    start_nll, _ = _gam_objective(start, design, y)

    bounds = [(None, None)] * basis.dimension + [_XI_BOUNDS]
    result = minimize(
        _gam_objective,
        start,
        args=(design, y),
        jac=True,
        method="L-BFGS-B",
        bounds=bounds,
        options={"maxiter": 2000},
    )
    if not np.isfinite(result.fun):
        _LOGGER.debug("L-BFGS-B failed for degree %s (%s); retrying with Powell",
                      basis.degree, result.message)
        result = minimize(
            lambda params: _gam_objective(params, design, y)[0],
            start,
            method="Powell",
            bounds=bounds,
        )
    if not np.isfinite(result.fun):
        raise SplineFitError(f"GPD spline likelihood optimization failed: {result.message}")

    params = result.x if result.fun <= start_nll else start
    nll = min(float(result.fun), start_nll)
    if not result.success:
        _LOGGER.warning(
            "GPD spline fit (degree %s) stopped early: %s", basis.degree, result.message
        )
    return SplineSurface(
        basis=basis,
        threshold=threshold,
        log_scale_coef=np.asarray(params[:-1]),
        xi=float(params[-1]),
        q_u=threshold.q_u,
        w_min=polar.w_min,
        w_max=polar.w_max,
        loglik=-nll,
        n_exceedances=count,
        diagnostics={"constant_loglik": constant.loglik, "converged": bool(result.success)},
    )


def predict_radial_quantile(surface: SplineSurface, w: Number, q: float) -> Number:
    """Return the q-quantile of R at angle w from the smooth surface."""
    w_arr = np.atleast_1d(np.asarray(w, dtype=float))
    outside = (w_arr < surface.w_min) | (w_arr > surface.w_max)
    if np.any(outside):
        raise NotEstimableError(
            f"Angle {w_arr[outside][0]:.6f} lies outside the observed range "
            f"[{surface.w_min:.6f}, {surface.w_max:.6f}]"
        )
    zeta = 1.0 - surface.q_u
    if (1.0 - q) - zeta > 1e-12:
        raise NotEstimableError(f"Quantile level {q} lies below the threshold level {surface.q_u}")
    value = tail_quantile(surface.threshold(w_arr), surface.sigma(w_arr), surface.xi, zeta, q)
    return float(value[0]) if np.ndim(w) == 0 else value


def empirical_coverage(polar: PolarSample, threshold: ThresholdCurve) -> float:
    """Return the proportion of observations at or below the threshold curve."""
    return float(np.mean(polar.r <= threshold(polar.w)))


def fit_surface(
    polar: PolarSample,
    degree: int,
    kappa: int,
    q_u: float,
    min_exceedances: int = DEFAULT_MIN_GAM_EXCEEDANCES,
    basis: Optional[SplineBasis] = None,
) -> SplineSurface:
    """Build the basis, then fit the threshold curve and the GPD spline surface."""
    if basis is None:
        basis = build_basis(degree, kappa, polar.w_min, polar.w_max)
    threshold = fit_threshold_quantile(polar, basis, q_u)
    return fit_gpd_gam(polar, threshold, basis, min_exceedances=min_exceedances)

"""Extremal dependence measures from a boundary set, plus baseline estimators.

Geometric estimators take any object with a ``points`` attribute (a fitted
boundary or an analytic one) or a plain ``(k, 2)`` array of points in the unit
square. Quantities that cannot be estimated are returned as ``None`` for
scalars and ``NaN`` inside grids.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Union

import numpy as np
from scipy.optimize import minimize, minimize_scalar
from scipy.stats import rankdata

from .const import (
    ALL_BASELINES,
    BASELINE_CE,
    BASELINE_DRAISMA,
    BASELINE_HILL_ETA,
    BASELINE_HILL_LAMBDA,
    BASELINE_HILL_TAU,
    BASELINE_PENG,
    DEFAULT_BETA_MIN_EXCEEDANCES,
    DEFAULT_BETA_QUANTILE,
    DEFAULT_ETA_EXCEEDANCES,
    DEFAULT_LAMBDA_QUANTILE,
    DEFAULT_PENG_C,
    DEFAULT_TAU_MIN_POINTS,
    DEFAULT_TAU_QUANTILE,
)
from .errors import (
    BetaFitError,
    ConfigValidationError,
    DataValidationError,
    LimitSetError,
    NotEstimableError,
)

_LOGGER = logging.getLogger(__name__)

_BETA_UPPER = 1.0 - 1e-6
_VARIANCE_FLOOR = 1e-300


def _nan_to_none(values: np.ndarray) -> List[Optional[float]]:
    return [None if np.isnan(v) else float(v) for v in np.asarray(values, dtype=float)]


@dataclass
class DependenceSummary:
    """A coherent set of dependence measures on omega and delta grids."""

    eta: float
    omega_grid: np.ndarray
    lambda_values: np.ndarray
    delta_grid: np.ndarray
    tau1: np.ndarray
    tau2: np.ndarray
    alpha1: float
    alpha2: float
    beta1: Optional[float] = None
    beta2: Optional[float] = None
    chi: Optional[float] = None
    source: str = ""
    baselines: Dict[str, Any] = field(default_factory=dict)
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    def tau(self, component: int) -> np.ndarray:
        """Return tau_1 or tau_2 on the delta grid."""
        return self.tau1 if component == 1 else self.tau2

    def as_dict(self) -> Dict[str, Any]:
        """Return a JSON-friendly dictionary; NaN grid values become None."""
        data = {
            "eta": self.eta,
            "alpha1": self.alpha1,
            "alpha2": self.alpha2,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "chi": self.chi,
            "source": self.source,
            "omega": self.omega_grid.tolist(),
            "lambda": _nan_to_none(self.lambda_values),
            "delta": self.delta_grid.tolist(),
            "tau1": _nan_to_none(self.tau1),
            "tau2": _nan_to_none(self.tau2),
        }
        if self.baselines:
            data["baselines"] = {
                key: _nan_to_none(value) if isinstance(value, np.ndarray) else value
                for key, value in self.baselines.items()
            }
        if self.diagnostics:
            data["diagnostics"] = self.diagnostics
        return data


def boundary_points(boundary: Any) -> np.ndarray:
    """Return boundary points as a validated (k, 2) array."""
    points = np.asarray(getattr(boundary, "points", boundary), dtype=float)
    if points.ndim != 2 or points.shape[1] != 2 or points.shape[0] == 0:
        raise DataValidationError("A boundary set must be a non-empty list of (x1, x2) points")
    if not np.isfinite(points).all():
        raise DataValidationError("Boundary points must be finite")
    return points


def _component_columns(component: int):
    if component not in (1, 2):
        raise ConfigValidationError(f"Component must be 1 or 2, got {component}")
    return (0, 1) if component == 1 else (1, 0)


def eta_from_boundary(boundary: Any) -> float:
    """Largest componentwise minimum over the boundary points."""
    points = boundary_points(boundary)
    return float(points.min(axis=1).max())


def lambda_from_boundary(
    boundary: Any, omega: Union[float, Sequence[float]]
) -> Union[float, np.ndarray]:
    """Angular dependence lambda(omega), clamped to [max(omega, 1 - omega), 1].

    By convention lambda(0) = lambda(1) = 1.
    """
    points = boundary_points(boundary)
    omegas = np.atleast_1d(np.asarray(omega, dtype=float))
    values = np.ones_like(omegas)
    interior = (omegas > 0) & (omegas < 1)
    w = omegas[interior]
    reach = np.minimum(
        points[:, [0]] / w[None, :], points[:, [1]] / (1.0 - w)[None, :]
    ).max(axis=0)
    with np.errstate(divide="ignore"):
        raw = np.where(reach > 0, 1.0 / reach, 1.0)
    values[interior] = np.clip(raw, np.maximum(w, 1.0 - w), 1.0)
    return float(values[0]) if np.ndim(omega) == 0 else values


def tau_from_boundary(
    boundary: Any, delta: Union[float, Sequence[float]], component: int = 1
) -> Union[Optional[float], np.ndarray]:
    """Largest x_i over points with x_other <= delta x_i.

    A scalar delta returns None when no point qualifies; a grid returns NaN there.
    """
    points = boundary_points(boundary)
    i, other = _component_columns(component)
    deltas = np.atleast_1d(np.asarray(delta, dtype=float))
    eligible = points[:, [other]] <= deltas[None, :] * points[:, [i]]
    candidates = np.where(eligible, points[:, [i]], -np.inf)
    best = candidates.max(axis=0)
    values = np.where(np.isfinite(best), best, np.nan)
    if np.ndim(delta) == 0:
        return None if np.isnan(values[0]) else float(values[0])
    return values


def alpha_from_boundary(boundary: Any, component: int = 1, tol: float = 0.0) -> float:
    """Largest x_other among the points where x_i attains its maximum.

    The maximum must equal 1; ``tol`` relaxes that check for boundaries
    sampled on an angular grid, where the peak can fall between two angles.
    """
    points = boundary_points(boundary)
    i, other = _component_columns(component)
    top = points[:, i].max()
    if top < 1.0 - tol:
        raise DataValidationError(
            f"Boundary coordinate x{component} never reaches 1 (maximum {top:.6g})"
        )
    return float(points[points[:, i] >= top, other].max())


def boundary_summary(
    boundary: Any,
    omega_grid: Sequence[float],
    delta_grid: Sequence[float],
    source: str = "",
    tol: float = 0.0,
) -> DependenceSummary:
    """Every geometric measure of one boundary set."""
    points = boundary_points(boundary)
    omega = np.asarray(omega_grid, dtype=float)
    delta = np.asarray(delta_grid, dtype=float)
    return DependenceSummary(
        eta=eta_from_boundary(points),
        omega_grid=omega,
        lambda_values=lambda_from_boundary(points, omega),
        delta_grid=delta,
        tau1=tau_from_boundary(points, delta, 1),
        tau2=tau_from_boundary(points, delta, 2),
        alpha1=alpha_from_boundary(points, 1, tol=tol),
        alpha2=alpha_from_boundary(points, 2, tol=tol),
        source=source,
    )


class BetaFit(NamedTuple):
    """Normal working-model fit of the conditional-extremes scale exponent."""

    beta: float
    mu: float
    sigma: float
    n_exceedances: int
    degenerate: bool


class ConditionalExtremesFit(NamedTuple):
    """Joint maximum likelihood fit of the conditional-extremes normalization."""

    alpha: float
    beta: float
    mu: float
    sigma: float
    loglik: float
    n_exceedances: int


def _conditioning_pairs(sample, component: int, u: Optional[float], quantile: float,
                        min_exceedances: int):
    i, other = _component_columns(component)
    x = sample.rows[:, i]
    y = sample.rows[:, other]
    if u is None:
        u = float(np.quantile(x, quantile))
    above = x > u
    count = int(above.sum())
    if count < min_exceedances:
        raise DataValidationError(
            f"Need at least {min_exceedances} exceedances of x{component} above {u:.4f}, "
            f"got {count}"
        )
    return x[above], y[above]


def _profile_nll(alpha: float, beta: float, x: np.ndarray, y: np.ndarray, log_x: np.ndarray):
    z = (y - alpha * x) * np.exp(-beta * log_x)
    variance = max(float(z.var()), _VARIANCE_FLOOR)
    return beta * log_x.sum() + 0.5 * x.size * np.log(variance), z


def beta_fit(
    sample,
    alpha: float,
    u: Optional[float] = None,
    component: int = 1,
    quantile: float = DEFAULT_BETA_QUANTILE,
    min_exceedances: int = DEFAULT_BETA_MIN_EXCEEDANCES,
) -> BetaFit:
    """Fit beta, mu and sigma with alpha fixed, conditioning on x_i > u.

    The working model is X_other | X_i = x ~ N(alpha x + x**beta mu,
    (x**beta sigma)**2). mu and sigma are profiled out, leaving a bounded
    one-dimensional search over beta in [0, 1).
    """
    x, y = _conditioning_pairs(sample, component, u, quantile, min_exceedances)
    residual = y - alpha * x
    if np.allclose(residual, 0.0, atol=1e-12):
        _LOGGER.warning("Conditional residuals vanish; beta fit is degenerate (sigma -> 0)")
        return BetaFit(beta=0.0, mu=0.0, sigma=0.0, n_exceedances=x.size, degenerate=True)
    log_x = np.log(x)
    result = minimize_scalar(
        lambda beta: _profile_nll(alpha, beta, x, y, log_x)[0],
        bounds=(0.0, _BETA_UPPER),
        method="bounded",
        options={"xatol": 1e-8},
    )
    if not result.success:
        raise BetaFitError(f"Beta optimization failed: {result.message}")
    beta = float(result.x)
    _, z = _profile_nll(alpha, beta, x, y, log_x)
    sigma = float(z.std())
    return BetaFit(
        beta=beta,
        mu=float(z.mean()),
        sigma=sigma,
        n_exceedances=x.size,
        degenerate=sigma < 1e-8,
    )


def conditional_extremes_mle(
    sample,
    u: Optional[float] = None,
    component: int = 1,
    quantile: float = DEFAULT_BETA_QUANTILE,
    min_exceedances: int = DEFAULT_BETA_MIN_EXCEEDANCES,
) -> ConditionalExtremesFit:
    """Fit alpha and beta jointly under the normal working model."""
    x, y = _conditioning_pairs(sample, component, u, quantile, min_exceedances)
    log_x = np.log(x)

    def objective(params: np.ndarray) -> float:
        return _profile_nll(params[0], params[1], x, y, log_x)[0]

    best = None
    for start in ((0.1, 0.1), (0.5, 0.3), (0.9, 0.1)):
        result = minimize(
            objective, np.array(start), method="L-BFGS-B", bounds=[(0.0, 1.0), (0.0, _BETA_UPPER)]
        )
        if np.isfinite(result.fun) and (best is None or result.fun < best.fun):
            best = result
    if best is None:
        raise BetaFitError("Conditional-extremes likelihood could not be evaluated")
    alpha, beta = (float(v) for v in best.x)
    _, z = _profile_nll(alpha, beta, x, y, log_x)
    sigma = float(z.std())
    loglik = -float(best.fun) - 0.5 * x.size * (1.0 + np.log(2.0 * np.pi))
    return ConditionalExtremesFit(
        alpha=alpha, beta=beta, mu=float(z.mean()), sigma=sigma, loglik=loglik,
        n_exceedances=x.size,
    )


def mean_excess(values: np.ndarray, threshold: float) -> Optional[float]:
    """Mean of the strict excesses of a threshold, or None without any."""
    excesses = values[values > threshold] - threshold
    return float(excesses.mean()) if excesses.size else None


def hill_eta(sample, n_exceed: int = DEFAULT_ETA_EXCEEDANCES) -> float:
    """Hill-type estimate of eta from the n_exceed largest values of min(X1, X2)."""
    structure = np.sort(sample.rows.min(axis=1))
    n = structure.size
    if not 1 <= n_exceed < n:
        raise ConfigValidationError(f"Need 1 <= exceedances < n = {n}, got {n_exceed}")
    u = structure[n - n_exceed - 1]
    value = float(np.mean(structure[n - n_exceed:] - u))
    if value <= 0:
        raise NotEstimableError("The largest minima are tied; eta cannot be estimated")
    return min(value, 1.0)


def joint_exceedance_counts(sample, c_max: int) -> np.ndarray:
    """Return s_n(j) for j = 0..c_max: points in the top j of both margins."""
    # descending rank with ties counted high: x_i > X_(n-j) iff rank <= j
    r1 = rankdata(-sample.x1, method="max")
    r2 = rankdata(-sample.x2, method="max")
    depth = np.maximum(r1, r2).astype(int)
    counts = np.bincount(depth[depth <= c_max], minlength=c_max + 1)
    return np.cumsum(counts)


def _check_c(sample, c: int) -> None:
    if c < 1 or 2 * c > sample.n:
        raise ConfigValidationError(f"Need 1 <= c and 2c <= n = {sample.n}, got c = {c}")


def peng_eta(sample, c: int = DEFAULT_PENG_C) -> Optional[float]:
    """Peng's estimate log 2 / log{s(2c) / s(c)}, truncated at 1."""
    _check_c(sample, c)
    s = joint_exceedance_counts(sample, 2 * c)
    if s[c] == 0 or s[2 * c] == s[c]:
        return None
    return min(float(np.log(2.0) / (np.log(s[2 * c]) - np.log(s[c]))), 1.0)


def draisma_eta(sample, c: int = DEFAULT_PENG_C) -> Optional[float]:
    """Draisma et al.'s estimate sum s(j) / {c s(c) - sum s(j)}, truncated at 1."""
    _check_c(sample, c)
    s = joint_exceedance_counts(sample, c)
    total = float(s[1:].sum())
    denominator = c * float(s[c]) - total
    if s[c] == 0 or denominator <= 0:
        return None
    return min(total / denominator, 1.0)


def hill_lambda(
    sample, omega: Union[float, Sequence[float]], quantile: float = DEFAULT_LAMBDA_QUANTILE
) -> Union[Optional[float], np.ndarray]:
    """Reciprocal mean excess of min(X1/omega, X2/(1-omega)), truncated at 1."""
    omegas = np.atleast_1d(np.asarray(omega, dtype=float))
    if np.any((omegas <= 0) | (omegas >= 1)):
        raise ConfigValidationError("Hill-type lambda needs omega in (0, 1)")
    values = np.full(omegas.shape, np.nan)
    for j, w in enumerate(omegas):
        structure = np.minimum(sample.x1 / w, sample.x2 / (1.0 - w))
        excess = mean_excess(structure, float(np.quantile(structure, quantile)))
        if excess:
            values[j] = min(1.0 / excess, 1.0)
    if np.ndim(omega) == 0:
        return None if np.isnan(values[0]) else float(values[0])
    return values


def hill_tau(
    sample,
    delta: Union[float, Sequence[float]],
    component: int = 1,
    quantile: float = DEFAULT_TAU_QUANTILE,
    min_points: int = DEFAULT_TAU_MIN_POINTS,
) -> Union[Optional[float], np.ndarray]:
    """Mean excess of x_i over points with x_other <= delta x_i, truncated at 1."""
    i, other = _component_columns(component)
    deltas = np.atleast_1d(np.asarray(delta, dtype=float))
    x = sample.rows[:, i]
    y = sample.rows[:, other]
    values = np.full(deltas.shape, np.nan)
    for j, d in enumerate(deltas):
        qualifying = x[y <= d * x]
        if qualifying.size < min_points:
            continue
        excess = mean_excess(qualifying, float(np.quantile(qualifying, quantile)))
        if excess is not None:
            values[j] = min(excess, 1.0)
    if np.ndim(delta) == 0:
        return None if np.isnan(values[0]) else float(values[0])
    return values


def _safe(name: str, func, *args, **kwargs):
    try:
        return func(*args, **kwargs)
    except LimitSetError as err:
        _LOGGER.warning("%s not estimable: %s", name, err)
        return None


def baseline_measures(
    sample,
    omega_grid: Sequence[float],
    delta_grid: Sequence[float],
    eta_exceedances: int = DEFAULT_ETA_EXCEEDANCES,
    peng_c: int = DEFAULT_PENG_C,
    beta_quantile: float = DEFAULT_BETA_QUANTILE,
    include: Optional[Sequence[str]] = None,
) -> Dict[str, Any]:
    """Separate-estimation baselines with their default thresholds.

    ``include`` selects among ALL_BASELINES; every baseline is computed when it
    is None. Keys follow the study naming: eta_H, eta_P, eta_D, lambda_H,
    tau1_H, tau2_H, alpha{1,2}_CE and beta{1,2}_CE.
    """
    selected = set(ALL_BASELINES if include is None else include)
    unknown = selected.difference(ALL_BASELINES)
    if unknown:
        raise ConfigValidationError(f"Unknown baselines {sorted(unknown)}")
    n_exceed = min(eta_exceedances, sample.n - 1)
    c = min(peng_c, sample.n // 2)
    baselines: Dict[str, Any] = {}
    if BASELINE_HILL_ETA in selected:
        baselines["eta_H"] = _safe("Hill eta", hill_eta, sample, n_exceed)
    if BASELINE_PENG in selected:
        baselines["eta_P"] = _safe("Peng eta", peng_eta, sample, c)
    if BASELINE_DRAISMA in selected:
        baselines["eta_D"] = _safe("Draisma eta", draisma_eta, sample, c)
    if BASELINE_HILL_LAMBDA in selected:
        omega = np.asarray(omega_grid, dtype=float)
        interior = (omega > 0) & (omega < 1)
        lambda_h = np.ones_like(omega)
        if interior.any():
            lambda_h[interior] = hill_lambda(sample, omega[interior])
        baselines["lambda_H"] = lambda_h
    if BASELINE_HILL_TAU in selected:
        baselines["tau1_H"] = hill_tau(sample, np.asarray(delta_grid, dtype=float), 1)
        baselines["tau2_H"] = hill_tau(sample, np.asarray(delta_grid, dtype=float), 2)
    if BASELINE_CE in selected:
        for component in (1, 2):
            fit = _safe(
                f"Conditional extremes (x{component})",
                conditional_extremes_mle,
                sample,
                component=component,
                quantile=beta_quantile,
            )
            baselines[f"alpha{component}_CE"] = fit.alpha if fit else None
            baselines[f"beta{component}_CE"] = fit.beta if fit else None
    return baselines


def summarize(
    fit: Any,
    sample,
    omega_grid: Sequence[float],
    delta_grid: Sequence[float],
    beta_quantile: float = DEFAULT_BETA_QUANTILE,
) -> DependenceSummary:
    """All measures from one fitted boundary, with beta from the working model."""
    boundary = getattr(fit, "boundary", fit)
    summary = boundary_summary(
        boundary, omega_grid, delta_grid, source=getattr(boundary, "source", "")
    )
    for component, alpha in ((1, summary.alpha1), (2, summary.alpha2)):
        result = _safe(
            f"beta{component}", beta_fit, sample, alpha, component=component, quantile=beta_quantile
        )
        if result is not None:
            setattr(summary, f"beta{component}", result.beta)
            summary.diagnostics[f"beta{component}_fit"] = result._asdict()
    return summary


def is_nondecreasing(values: np.ndarray) -> bool:
    """Whether the estimable (non-NaN) values never decrease."""
    finite = np.asarray(values, dtype=float)
    finite = finite[~np.isnan(finite)]
    return bool(np.all(np.diff(finite) >= 0))


def consistency_violations(boundary: Any, summary: DependenceSummary, tol: float = 1e-12) -> List[str]:
    """Return the names of the self-consistency properties the estimates violate."""
    points = boundary_points(boundary)
    violations: List[str] = []
    eta, a1, a2 = summary.eta, summary.alpha1, summary.alpha2
    if eta < max(a1, a2) - tol:
        violations.append("eta_below_alpha")
    if not ((eta == 1.0) == (a1 == 1.0) == (a2 == 1.0)):
        violations.append("eta_alpha_equivalence")
    if eta >= 0.5 and abs(lambda_from_boundary(points, 0.5) * 2.0 * eta - 1.0) > tol:
        violations.append("lambda_eta_identity")
    if points[:, 0].max() != 1.0 or points[:, 1].max() != 1.0:
        violations.append("coordinate_maxima")
    for component, alpha in ((1, a1), (2, a2)):
        tau = summary.tau(component)
        if not is_nondecreasing(tau):
            violations.append(f"tau{component}_monotone")
        # the point (1, alpha) qualifies once delta >= alpha
        reachable = (summary.delta_grid < 1) & (summary.delta_grid >= alpha)
        if reachable.any() and eta < 1.0 and np.nanmax(tau[reachable]) < 1.0:
            violations.append(f"tau{component}_constraint")
    return violations

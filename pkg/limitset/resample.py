"""Stationary bootstrap for serially dependent pairs."""
import logging
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from arch.bootstrap import StationaryBootstrap

from .config import BOOTSTRAP_SCHEMA, FitConfig, validate_input
from .const import (
    CONF_BLOCK_MEAN,
    CONF_N,
    CONF_REPLICATES,
    CONF_SEED,
    DEFAULT_BETA_QUANTILE,
    DEFAULT_BLOCK_MEAN,
    DEFAULT_INTERVAL_LEVELS,
    DEFAULT_REPLICATES,
    DEFAULT_SEED,
)
from .errors import ConfigValidationError, LimitSetError
from .local import LimitSetEstimate
from .margins import RawSample, to_exponential_margins
from .measures import DependenceSummary, summarize
from .smooth import estimate

_LOGGER = logging.getLogger(__name__)

_SCALAR_MEASURES = ("eta", "alpha1", "alpha2", "beta1", "beta2")
_GRID_MEASURES = (("lambda", "lambda_values"), ("tau1", "tau1"), ("tau2", "tau2"))


@dataclass(frozen=True)
class BootstrapPlan:
    """Series length, mean block length, replicate count and root seed."""

    n: int
    mean_block: float = DEFAULT_BLOCK_MEAN
    replicates: int = DEFAULT_REPLICATES
    seed: int = DEFAULT_SEED

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "BootstrapPlan":
        """Build a validated plan from user input."""
        valid = validate_input(BOOTSTRAP_SCHEMA, data)
        return cls(
            n=valid[CONF_N],
            mean_block=valid[CONF_BLOCK_MEAN],
            replicates=valid[CONF_REPLICATES],
            seed=valid[CONF_SEED],
        )


def _bootstrap(plan: BootstrapPlan, replicate: int) -> StationaryBootstrap:
    """Bootstrap over row positions, seeded per replicate so workers agree."""
    return StationaryBootstrap(
        plan.mean_block, np.arange(plan.n), seed=np.random.default_rng([plan.seed, replicate])
    )


def stationary_bootstrap_indices(plan: BootstrapPlan, replicate: int) -> np.ndarray:
    """Return n zero-based row indices built from circular blocks of geometric length."""
    return np.asarray(_bootstrap(plan, replicate).update_indices(), dtype=np.int64)


def block_starts(indices: np.ndarray, n: int) -> np.ndarray:
    """Flag the positions where a new block begins.

    A fresh start that happens to continue the previous block is read as part of it.
    """
    starts = np.ones(indices.size, dtype=bool)
    starts[1:] = indices[1:] != (indices[:-1] + 1) % n
    return starts


def block_lengths(plan: BootstrapPlan, replicate: int) -> np.ndarray:
    """Return the lengths of the complete blocks of one replicate (the last is cut off)."""
    indices = stationary_bootstrap_indices(plan, replicate)
    return np.diff(np.flatnonzero(block_starts(indices, plan.n)))


@dataclass
class BootstrapResult:
    """Per-replicate summaries, failures and percentile intervals."""

    summaries: List[Optional[DependenceSummary]]
    boundaries: List[Optional[LimitSetEstimate]]
    failures: Dict[int, str] = field(default_factory=dict)
    intervals: Dict[str, Any] = field(default_factory=dict)

    @property
    def succeeded(self) -> List[DependenceSummary]:
        """Summaries of the replicates that did not fail."""
        return [summary for summary in self.summaries if summary is not None]


def _run_replicate(
    raw: RawSample,
    config: FitConfig,
    plan: BootstrapPlan,
    replicate: int,
    omega_grid: np.ndarray,
    delta_grid: np.ndarray,
    beta_quantile: float,
) -> Tuple[int, Optional[DependenceSummary], Optional[LimitSetEstimate], Optional[str]]:
    indices = stationary_bootstrap_indices(plan, replicate)
    try:
        sample = to_exponential_margins(raw.take(indices))
        fit = estimate(sample, config)
        summary = summarize(fit, sample, omega_grid, delta_grid, beta_quantile=beta_quantile)
    except LimitSetError as err:
        return replicate, None, None, str(err)
    return replicate, summary, fit.boundary, None


def percentile_intervals(
    summaries: Sequence[DependenceSummary], levels: Sequence[float] = DEFAULT_INTERVAL_LEVELS
) -> Dict[str, Any]:
    """Pointwise central percentile intervals for every measure."""
    intervals: Dict[str, Any] = {}
    if not summaries:
        return intervals
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", category=RuntimeWarning)
        for name in _SCALAR_MEASURES:
            values = np.array(
                [np.nan if getattr(s, name) is None else getattr(s, name) for s in summaries],
                dtype=float,
            )
            intervals[name] = {
                str(level): [
                    _none_if_nan(np.nanquantile(values, (1 - level) / 2)),
                    _none_if_nan(np.nanquantile(values, (1 + level) / 2)),
                ]
                for level in levels
            }
        for name, attribute in _GRID_MEASURES:
            stacked = np.vstack([getattr(s, attribute) for s in summaries])
            intervals[name] = {
                str(level): {
                    "lower": [_none_if_nan(v) for v in np.nanquantile(stacked, (1 - level) / 2, axis=0)],
                    "upper": [_none_if_nan(v) for v in np.nanquantile(stacked, (1 + level) / 2, axis=0)],
                }
                for level in levels
            }
    return intervals


def _none_if_nan(value: float) -> Optional[float]:
    return None if np.isnan(value) else float(value)


def bootstrap_measures(
    raw: RawSample,
    config: FitConfig,
    plan: BootstrapPlan,
    omega_grid: np.ndarray,
    delta_grid: np.ndarray,
    beta_quantile: float = DEFAULT_BETA_QUANTILE,
    threads: int = 1,
    levels: Sequence[float] = DEFAULT_INTERVAL_LEVELS,
) -> BootstrapResult:
    """Refit the whole pipeline, rank transform included, on each resampled series."""
    if plan.n != raw.n:
        raise ConfigValidationError(f"Bootstrap plan is for n={plan.n}, sample has n={raw.n}")
    args = [
        (raw, config, plan, b, omega_grid, delta_grid, beta_quantile)
        for b in range(plan.replicates)
    ]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as executor:
            outcomes = list(executor.map(_run_replicate, *zip(*args)))
    else:
        outcomes = [_run_replicate(*arg) for arg in args]

    result = BootstrapResult(
        summaries=[None] * plan.replicates, boundaries=[None] * plan.replicates
    )
    for replicate, summary, boundary, error in outcomes:
        if error is not None:
            _LOGGER.warning("Bootstrap replicate %s failed: %s", replicate, error)
            result.failures[replicate] = error
            continue
        result.summaries[replicate] = summary
        result.boundaries[replicate] = boundary
    result.intervals = percentile_intervals(result.succeeded, levels)
    _LOGGER.info(
        "Bootstrap finished: %s of %s replicates succeeded",
        len(result.succeeded), plan.replicates,
    )
    return result

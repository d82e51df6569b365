"""Configuration schemas and validated tuning parameters for limitset."""
import dataclasses
import logging
from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np
import voluptuous as vol

from .const import (
    ALL_ESTIMATORS,
    CONF_BETA_QUANTILE,
    CONF_BLOCK_MEAN,
    CONF_DEGREES,
    CONF_DELTA_GRID,
    CONF_ESTIMATORS,
    CONF_ETA_EXCEEDANCES,
    CONF_FAMILY,
    CONF_FIT,
    CONF_GAMMA,
    CONF_K,
    CONF_KAPPA,
    CONF_KAPPA_VALUES,
    CONF_M,
    CONF_MIN_GAM_EXCEEDANCES,
    CONF_MIN_GPD_EXCESSES,
    CONF_MODELS,
    CONF_N,
    CONF_OMEGA_GRID,
    CONF_OUTPUT_DIR,
    CONF_Q,
    CONF_Q_U,
    CONF_Q_VALUES,
    CONF_REPLICATES,
    CONF_RHO,
    CONF_SCALING,
    CONF_SEED,
    CONF_THETA1,
    CONF_THETA2,
    CONF_THREADS,
    DEFAULT_BETA_QUANTILE,
    DEFAULT_BLOCK_MEAN,
    DEFAULT_DEGREES,
    DEFAULT_ETA_EXCEEDANCES,
    DEFAULT_GRID_STEP,
    DEFAULT_K,
    DEFAULT_KAPPA,
    DEFAULT_M,
    DEFAULT_MIN_GAM_EXCEEDANCES,
    DEFAULT_MIN_GPD_EXCESSES,
    DEFAULT_OUTPUT_DIR,
    DEFAULT_Q,
    DEFAULT_Q_U,
    DEFAULT_REPLICATES,
    DEFAULT_SEED,
    DEFAULT_STUDY_N,
    DEFAULT_STUDY_REPLICATES,
    FAMILY_ASYMMETRIC_LOGISTIC,
    FAMILY_GAUSSIAN,
    FAMILY_INVERTED_LOGISTIC,
    FAMILY_LOGISTIC,
    SCALING_NAIVE,
    SCALING_TRUNCATE,
)
from .errors import ConfigValidationError

_LOGGER = logging.getLogger(__name__)

FAMILIES = (
    FAMILY_GAUSSIAN,
    FAMILY_LOGISTIC,
    FAMILY_INVERTED_LOGISTIC,
    FAMILY_ASYMMETRIC_LOGISTIC,
)

_PROBABILITY = vol.All(
    vol.Coerce(float), vol.Range(min=0, max=1, min_included=False, max_included=False)
)
_UNIT_OPEN = _PROBABILITY


def _odd(value: int) -> int:
    """Reject even angle-grid sizes."""
    if value % 2 == 0:
        raise vol.Invalid("must be odd so that 1/2 is the centre of the angle grid")
    return value


def _degrees(value: Any) -> Tuple[int, ...]:
    """Coerce a collection of spline degrees to a sorted tuple."""
    if isinstance(value, (int, np.integer)):
        value = [value]
    degrees = tuple(sorted({int(v) for v in value}))
    if not degrees or any(d not in (1, 2, 3) for d in degrees):
        raise vol.Invalid("spline degrees must be drawn from {1, 2, 3}")
    return degrees


def _check_quantiles(data: Dict[str, Any]) -> Dict[str, Any]:
    """Require the threshold level to sit below the extrapolation level."""
    if data[CONF_Q_U] >= data[CONF_Q]:
        raise vol.Invalid(f"{CONF_Q_U} must be smaller than {CONF_Q}")
    return data


def _check_family_parameters(data: Dict[str, Any]) -> Dict[str, Any]:
    """Require the parameters each copula family needs."""
    family = data[CONF_FAMILY]
    if family == FAMILY_GAUSSIAN:
        needed = (CONF_RHO,)
    elif family in (FAMILY_LOGISTIC, FAMILY_INVERTED_LOGISTIC):
        needed = (CONF_GAMMA,)
    else:
        needed = (CONF_GAMMA, CONF_THETA1, CONF_THETA2)
    missing = [key for key in needed if data.get(key) is None]
    if missing:
        raise vol.Invalid(f"{family} copula requires {', '.join(missing)}")
    return data


def _grid(value: Any) -> Tuple[float, ...]:
    """Coerce a grid given as a list or as a 'start:stop:step' string."""
    if isinstance(value, str):
        return tuple(parse_grid(value))
    grid = tuple(float(v) for v in value)
    if any(not 0.0 <= v <= 1.0 for v in grid):
        raise vol.Invalid("grid values must lie in [0, 1]")
    return grid


FIT_SCHEMA = vol.All(
    vol.Schema(
        {
            vol.Optional(CONF_K, default=DEFAULT_K): vol.All(
                vol.Coerce(int), vol.Range(min=3), _odd
            ),
            vol.Optional(CONF_M, default=DEFAULT_M): vol.All(
                vol.Coerce(int), vol.Range(min=10)
            ),
            vol.Optional(CONF_Q_U, default=DEFAULT_Q_U): _PROBABILITY,
            vol.Optional(CONF_Q, default=DEFAULT_Q): _PROBABILITY,
            vol.Optional(CONF_KAPPA, default=DEFAULT_KAPPA): vol.All(
                vol.Coerce(int), vol.Range(min=1)
            ),
            vol.Optional(CONF_DEGREES, default=list(DEFAULT_DEGREES)): _degrees,
            vol.Optional(CONF_SCALING, default=SCALING_TRUNCATE): vol.In(
                [SCALING_TRUNCATE, SCALING_NAIVE]
            ),
            vol.Optional(CONF_ETA_EXCEEDANCES, default=DEFAULT_ETA_EXCEEDANCES): vol.All(
                vol.Coerce(int), vol.Range(min=2)
            ),
            vol.Optional(CONF_MIN_GPD_EXCESSES, default=DEFAULT_MIN_GPD_EXCESSES): vol.All(
                vol.Coerce(int), vol.Range(min=3)
            ),
            vol.Optional(
                CONF_MIN_GAM_EXCEEDANCES, default=DEFAULT_MIN_GAM_EXCEEDANCES
            ): vol.All(vol.Coerce(int), vol.Range(min=3)),
        }
    ),
    _check_quantiles,
)

COPULA_SCHEMA = vol.All(
    vol.Schema(
        {
            vol.Required(CONF_FAMILY): vol.All(
                str, vol.Lower, lambda v: v.replace("-", "_"), vol.In(FAMILIES)
            ),
            vol.Optional(CONF_RHO): vol.Any(
                None,
                vol.All(
                    vol.Coerce(float), vol.Range(min=0, max=1, max_included=False)
                ),
            ),
            vol.Optional(CONF_GAMMA): vol.Any(None, _UNIT_OPEN),
            vol.Optional(CONF_THETA1): vol.Any(None, _UNIT_OPEN),
            vol.Optional(CONF_THETA2): vol.Any(None, _UNIT_OPEN),
        }
    ),
    _check_family_parameters,
)

BOOTSTRAP_SCHEMA = vol.Schema(
    {
        vol.Required(CONF_N): vol.All(vol.Coerce(int), vol.Range(min=1)),
        vol.Optional(CONF_BLOCK_MEAN, default=DEFAULT_BLOCK_MEAN): vol.All(
            vol.Coerce(float), vol.Range(min=1)
        ),
        vol.Optional(CONF_REPLICATES, default=DEFAULT_REPLICATES): vol.All(
            vol.Coerce(int), vol.Range(min=1)
        ),
        vol.Optional(CONF_SEED, default=DEFAULT_SEED): vol.All(
            vol.Coerce(int), vol.Range(min=0)
        ),
    }
)

SIMULATE_SCHEMA = vol.Schema(
    {
        vol.Optional(CONF_N, default=DEFAULT_STUDY_N): vol.All(vol.Coerce(int), vol.Range(min=1)),
        vol.Optional(CONF_SEED, default=DEFAULT_SEED): vol.All(
            vol.Coerce(int), vol.Range(min=0)
        ),
    },
    extra=vol.REMOVE_EXTRA,
)

STUDY_SCHEMA = vol.Schema(
    {
        vol.Required(CONF_MODELS): vol.All([dict], vol.Length(min=1)),
        vol.Optional(CONF_REPLICATES, default=DEFAULT_STUDY_REPLICATES): vol.All(
            vol.Coerce(int), vol.Range(min=0)
        ),
        vol.Optional(CONF_N, default=DEFAULT_STUDY_N): vol.All(
            vol.Coerce(int), vol.Range(min=2)
        ),
        vol.Optional(CONF_ESTIMATORS, default=list(ALL_ESTIMATORS)): vol.All(
            [vol.In(ALL_ESTIMATORS)], vol.Length(min=1)
        ),
        vol.Optional(CONF_KAPPA_VALUES): vol.Any(
            None, [vol.All(vol.Coerce(int), vol.Range(min=1))]
        ),
        vol.Optional(CONF_Q_VALUES): vol.Any(None, [_PROBABILITY]),
        vol.Optional(CONF_FIT, default={}): dict,
        vol.Optional(CONF_OMEGA_GRID): vol.Any(None, _grid),
        vol.Optional(CONF_DELTA_GRID): vol.Any(None, _grid),
        vol.Optional(CONF_BETA_QUANTILE, default=DEFAULT_BETA_QUANTILE): _PROBABILITY,
        vol.Optional(CONF_SEED, default=DEFAULT_SEED): vol.All(
            vol.Coerce(int), vol.Range(min=0)
        ),
        vol.Optional(CONF_OUTPUT_DIR, default=DEFAULT_OUTPUT_DIR): str,
        vol.Optional(CONF_THREADS, default=1): vol.All(vol.Coerce(int), vol.Range(min=1)),
    }
)


def validate_input(schema: Any, data: Optional[Dict[str, Any]]) -> Dict[str, Any]:
    """Validate user input against a schema.

    Data has the keys of the schema with values provided by the user; keys set
    to None are treated as absent so that unset CLI flags fall back to defaults.
    """
    cleaned = {key: value for key, value in (data or {}).items() if value is not None}
    try:
        return schema(cleaned)
    except vol.Invalid as err:
        _LOGGER.debug("Rejected configuration %s: %s", cleaned, err)
        raise ConfigValidationError(f"Invalid configuration: {err}") from err


def parse_grid(text: str) -> np.ndarray:
    """Parse a 'start:stop:step' grid specification (stop inclusive)."""
    try:
        start, stop, step = (float(part) for part in text.split(":"))
    except ValueError as err:
        raise ConfigValidationError(
            f"Grid must look like start:stop:step, got {text!r}"
        ) from err
    if step <= 0 or stop < start or start < 0 or stop > 1:
        raise ConfigValidationError(f"Grid {text!r} must be increasing within [0, 1]")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return np.round(start + step * np.arange(count), 12)


def default_grid() -> np.ndarray:
    """Return the default interior grid 0.01, 0.02, ..., 0.99."""
    return parse_grid(f"{DEFAULT_GRID_STEP}:{1 - DEFAULT_GRID_STEP}:{DEFAULT_GRID_STEP}")


@dataclass(frozen=True)
class FitConfig:
    """Tuning parameters of the limit set estimator."""

    k: int = DEFAULT_K
    m: int = DEFAULT_M
    q_u: float = DEFAULT_Q_U
    q: float = DEFAULT_Q
    kappa: int = DEFAULT_KAPPA
    degrees: Tuple[int, ...] = DEFAULT_DEGREES
    scaling: str = SCALING_TRUNCATE
    eta_exceedances: int = DEFAULT_ETA_EXCEEDANCES
    min_gpd_excesses: int = DEFAULT_MIN_GPD_EXCESSES
    min_gam_exceedances: int = DEFAULT_MIN_GAM_EXCEEDANCES

    @classmethod
    def from_dict(cls, data: Optional[Dict[str, Any]] = None) -> "FitConfig":
        """Build a configuration from user input, applying defaults."""
        return cls(**validate_input(FIT_SCHEMA, data))

    def as_dict(self) -> Dict[str, Any]:
        """Return the configuration as a plain dictionary."""
        data = dataclasses.asdict(self)
        data[CONF_DEGREES] = list(self.degrees)
        return data

    def replace(self, **changes: Any) -> "FitConfig":
        """Return a validated copy with some fields changed."""
        data = self.as_dict()
        data.update(changes)
        return FitConfig.from_dict(data)


def merge_settings(*layers: Optional[Dict[str, Any]]) -> Dict[str, Any]:
    """Merge settings dictionaries; later layers win, None values are skipped."""
    merged: Dict[str, Any] = {}
    for layer in layers:
        for key, value in (layer or {}).items():
            if value is not None:
                merged[key] = value
    return merged


def grid_or_default(values: Optional[Union[str, Sequence[float]]]) -> np.ndarray:
    """Return the given grid (list or start:stop:step) as an array, or the default grid."""
    if values is None:
        return default_grid()
    if isinstance(values, str):
        return parse_grid(values)
    return np.asarray(values, dtype=float)

"""Marginal standardization and pseudo-polar coordinates."""
import logging
from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np
from scipy.stats import rankdata

from .errors import DataValidationError

_LOGGER = logging.getLogger(__name__)

ArrayLike = Union[np.ndarray, Sequence[Sequence[float]]]


def _as_pairs(rows: ArrayLike) -> np.ndarray:
    """Return rows as a float array of shape (n, 2)."""
    data = np.asarray(rows, dtype=float)
    if data.ndim != 2 or data.shape[1] != 2:
        raise DataValidationError(f"Expected two columns, got array of shape {data.shape}")
    return data


@dataclass(frozen=True)
class RawSample:
    """Paired observations on their original scale."""

    rows: np.ndarray

    def __post_init__(self):
        """Validate the observations."""
        rows = _as_pairs(self.rows)
        if rows.shape[0] < 2:
            raise DataValidationError("At least two observations are required")
        bad = np.flatnonzero(~np.isfinite(rows).all(axis=1))
        if bad.size:
            raise DataValidationError(f"Non-finite value in row {bad[0]}")
        object.__setattr__(self, "rows", rows)

    @property
    def n(self) -> int:
        """Number of observations."""
        return self.rows.shape[0]

    def take(self, indices: np.ndarray) -> "RawSample":
        """Return the observations at the given row indices."""
        return RawSample(self.rows[np.asarray(indices)])


@dataclass(frozen=True)
class BivariateSample:
    """Paired observations on standard exponential margins."""

    rows: np.ndarray

    def __post_init__(self):
        """Validate the observations."""
        rows = _as_pairs(self.rows)
        if not np.isfinite(rows).all():
            raise DataValidationError("Exponential-scale sample contains non-finite values")
        negative = np.flatnonzero((rows < 0).any(axis=1))
        if negative.size:
            raise DataValidationError(f"Negative coordinate in row {negative[0]}")
        object.__setattr__(self, "rows", rows)

    @property
    def n(self) -> int:
        """Number of observations."""
        return self.rows.shape[0]

    @property
    def x1(self) -> np.ndarray:
        """First margin."""
        return self.rows[:, 0]

    @property
    def x2(self) -> np.ndarray:
        """Second margin."""
        return self.rows[:, 1]

    def swapped(self) -> "BivariateSample":
        """Return the sample with its two columns exchanged."""
        return BivariateSample(self.rows[:, ::-1].copy())


@dataclass(frozen=True)
class PolarSample:
    """Radial and angular components of a sample on exponential margins."""

    r: np.ndarray
    w: np.ndarray

    @property
    def n(self) -> int:
        """Number of observations."""
        return self.r.shape[0]

    @property
    def w_min(self) -> float:
        """Smallest observed angle."""
        return float(self.w.min())

    @property
    def w_max(self) -> float:
        """Largest observed angle."""
        return float(self.w.max())

    def to_cartesian(self) -> BivariateSample:
        """Reconstruct the exponential-scale sample."""
        x1, x2 = from_polar(self.r, self.w)
        return BivariateSample(np.column_stack([x1, x2]))


def to_exponential_margins(raw: RawSample) -> BivariateSample:
    """Rank-transform each margin to the standard exponential scale.

    Ties receive their average rank.
    """
    n = raw.n
    ranks = np.column_stack(
        [rankdata(raw.rows[:, 0], method="average"), rankdata(raw.rows[:, 1], method="average")]
    )
    # -log(1 - rank/(n+1))
    x = -np.log1p(-ranks / (n + 1))
    _LOGGER.debug("Rank-transformed %s observations to exponential margins", n)
    return BivariateSample(x)


def to_polar(sample: BivariateSample) -> PolarSample:
    """Convert a sample to pseudo-polar coordinates r = x1 + x2, w = x1 / r."""
    r = sample.x1 + sample.x2
    origin = np.flatnonzero(r <= 0)
    if origin.size:
        raise DataValidationError(
            f"Row {origin[0]} lies at the origin; its angle is undefined"
        )
    w = sample.x1 / r
    return PolarSample(r=r, w=w)


def from_polar(
    r: Union[float, np.ndarray], w: Union[float, np.ndarray]
) -> Tuple[Union[float, np.ndarray], Union[float, np.ndarray]]:
    """Return the Cartesian coordinates (r w, r (1 - w))."""
    return r * w, r * (1 - w)

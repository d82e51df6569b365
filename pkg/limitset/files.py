"""CSV and JSON ingestion and emission."""
import json
import logging
import math
import os
from typing import Any, Optional

import numpy as np
import pandas as pd
from pandas.api.types import is_numeric_dtype

from .errors import DataValidationError
from .local import LimitSetEstimate
from .margins import BivariateSample, PolarSample, RawSample
from .measures import DependenceSummary

_LOGGER = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
FLOAT_PRECISION = "round_trip"
BOUNDARY_COLUMNS = ["w", "x1", "x2"]


def _prepare(path: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)


def write_table(frame: pd.DataFrame, path: str) -> None:
    """Write a table as CSV with round-trip float precision."""
    _prepare(path)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    _LOGGER.debug("Wrote %s rows to %s", len(frame), path)


def read_sample_csv(path: str, header: bool = True) -> RawSample:
    """Read a two-column numeric CSV; bad cells are reported with their file line."""
    try:
        frame = pd.read_csv(
            path,
            header=0 if header else None,
            skip_blank_lines=True,
            float_precision=FLOAT_PRECISION,
        )
    except pd.errors.ParserError as err:
        raise DataValidationError(f"Malformed CSV {path}: {err}") from err
    except (OSError, pd.errors.EmptyDataError) as err:
        raise DataValidationError(f"Cannot read {path}: {err}") from err
    if frame.shape[1] != 2:
        raise DataValidationError(f"{path} must have exactly two columns, found {frame.shape[1]}")

    # only a column holding a non-numeric cell is left as object
    values = frame.apply(
        lambda column: column if is_numeric_dtype(column) else pd.to_numeric(column, errors="coerce")
    ).to_numpy(dtype=float)
    offset = 2 if header else 1
    bad = np.flatnonzero(~np.isfinite(values).all(axis=1))
    if bad.size:
        row = int(bad[0])
        raise DataValidationError(
            f"{path}, line {row + offset}: expected two finite numbers, got {list(frame.iloc[row])}"
        )
    _LOGGER.info("Read %s observations from %s", values.shape[0], path)
    return RawSample(values)


def write_sample_csv(sample: BivariateSample, path: str) -> None:
    """Write an exponential-scale sample with columns x1, x2."""
    write_table(pd.DataFrame({"x1": sample.x1, "x2": sample.x2}), path)


def write_polar_csv(polar: PolarSample, path: str) -> None:
    """Write pseudo-polar coordinates with columns r, w."""
    write_table(pd.DataFrame({"r": polar.r, "w": polar.w}), path)


def write_boundary_csv(boundary: LimitSetEstimate, path: str) -> None:
    """Write boundary points with columns w, x1, x2 in that order."""
    frame = pd.DataFrame(
        {"w": boundary.angles, "x1": boundary.x1, "x2": boundary.x2}, columns=BOUNDARY_COLUMNS
    )
    write_table(frame, path)


def validate_boundary(points: np.ndarray) -> None:
    """Check that points lie in the unit square and both coordinate maxima equal 1."""
    if points.size == 0:
        raise DataValidationError("Boundary set is empty")
    if not np.isfinite(points).all() or np.any((points < 0) | (points > 1)):
        raise DataValidationError("Boundary coordinates must lie in [0, 1]")
    if points[:, 0].max() != 1.0 or points[:, 1].max() != 1.0:
        raise DataValidationError("Boundary coordinate maxima must both equal 1")


def read_boundary_csv(path: str, validate: bool = True) -> LimitSetEstimate:
    """Read a boundary CSV with columns w, x1, x2."""
    try:
        frame = pd.read_csv(path, float_precision=FLOAT_PRECISION)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as err:
        raise DataValidationError(f"Cannot read boundary {path}: {err}") from err
    missing = [column for column in BOUNDARY_COLUMNS if column not in frame.columns]
    if missing:
        raise DataValidationError(f"Boundary {path} lacks columns {missing}")
    try:
        values = frame[BOUNDARY_COLUMNS].to_numpy(dtype=float)
    except ValueError as err:
        raise DataValidationError(f"Boundary {path} has non-numeric values: {err}") from err
    points = values[:, 1:]
    if validate:
        validate_boundary(points)
    return LimitSetEstimate(
        angles=values[:, 0],
        points=points,
        x_star=float("nan"),
        source=os.path.basename(path),
    )


def write_lambda_csv(summary: DependenceSummary, path: str) -> None:
    """Write lambda on the omega grid, with the Hill-type curve when available."""
    data = {"omega": summary.omega_grid, "lambda": summary.lambda_values}
    if "lambda_H" in summary.baselines:
        data["lambda_H"] = summary.baselines["lambda_H"]
    write_table(pd.DataFrame(data), path)


def write_tau_csv(summary: DependenceSummary, path: str) -> None:
    """Write tau_1 and tau_2 on the delta grid; empty cells are not estimable."""
    data = {"delta": summary.delta_grid, "tau1": summary.tau1, "tau2": summary.tau2}
    for key in ("tau1_H", "tau2_H"):
        if key in summary.baselines:
            data[key] = summary.baselines[key]
    write_table(pd.DataFrame(data), path)


def jsonable(value: Any) -> Any:
    """Convert numpy containers and scalars to JSON types; NaN and infinities become None."""
    if isinstance(value, dict):
        return {str(key): jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [jsonable(item) for item in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return None if not math.isfinite(value) else float(value)
    return value


def write_json(data: Any, path: str, indent: Optional[int] = 2) -> None:
    """Write a report with sorted keys so reruns produce identical files."""
    _prepare(path)
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(jsonable(data), handle, sort_keys=True, indent=indent)
        handle.write("\n")
    _LOGGER.debug("Wrote report %s", path)

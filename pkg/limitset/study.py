"""Seeded replication studies comparing boundary-based and baseline estimators."""
import itertools
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from .config import STUDY_SCHEMA, FitConfig, grid_or_default, validate_input
from .const import (
    CONF_BETA_QUANTILE,
    CONF_DELTA_GRID,
    CONF_ESTIMATORS,
    CONF_FIT,
    CONF_KAPPA,
    CONF_KAPPA_VALUES,
    CONF_MODELS,
    CONF_N,
    CONF_OMEGA_GRID,
    CONF_OUTPUT_DIR,
    CONF_Q,
    CONF_Q_VALUES,
    CONF_REPLICATES,
    CONF_SEED,
    CONF_THREADS,
    ESTIMATOR_BASELINES,
    ESTIMATOR_CE_MLE,
    ESTIMATOR_DRAISMA,
    ESTIMATOR_G,
    ESTIMATOR_HILL,
    ESTIMATOR_PENG,
    FILE_STUDY_CONSISTENCY,
    FILE_STUDY_DEGREES,
    FILE_STUDY_MONOTONICITY,
    FILE_STUDY_REPLICATES,
    FILE_STUDY_REPORT,
    FILE_STUDY_SUMMARY,
)
from .copulas import CopulaSpec, sample, true_measures
from .errors import LimitSetError
from .files import write_json, write_table
from .margins import RawSample, to_exponential_margins
from .measures import (
    DependenceSummary,
    baseline_measures,
    consistency_violations,
    is_nondecreasing,
    summarize,
)
from .smooth import estimate

_LOGGER = logging.getLogger(__name__)

REPLICATE_COLUMNS = [
    "model", "replicate", "estimator", "measure", "grid", "estimate", "truth", "failed",
]
SUMMARY_COLUMNS = [
    "model", "estimator", "measure", "grid", "truth", "estimates", "not_estimable",
    "failures", "mean", "bias", "rmse", "q025", "q975",
]
DEGREE_COLUMNS = ["model", "estimator", "degree", "count"]
MONOTONICITY_COLUMNS = ["model", "estimator", "component", "replicates", "nondecreasing", "rate"]
CONSISTENCY_COLUMNS = ["model", "estimator", "property", "checked", "violated", "rate_satisfied"]
FAILURE_COLUMNS = ["model", "replicate", "estimator", "reason"]

CONSISTENCY_PROPERTIES = (
    "eta_below_alpha",
    "eta_alpha_equivalence",
    "lambda_eta_identity",
    "coordinate_maxima",
    "tau1_monotone",
    "tau2_monotone",
    "tau1_constraint",
    "tau2_constraint",
)
BASELINE_CONSISTENCY = "eta_below_alpha_CE"


@dataclass(frozen=True)
class StudyConfig:
    """Models, replication settings, estimator set and tuning parameters of a study."""

    models: Tuple[CopulaSpec, ...]
    replicates: int
    n: int
    estimators: Tuple[str, ...]
    fit: FitConfig
    kappa_values: Tuple[int, ...]
    q_values: Tuple[float, ...]
    omega_grid: np.ndarray
    delta_grid: np.ndarray
    beta_quantile: float
    seed: int
    output_dir: str
    threads: int = 1

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "StudyConfig":
        """Build a validated study configuration from user input."""
        valid = validate_input(STUDY_SCHEMA, data)
        fit = FitConfig.from_dict(valid[CONF_FIT])
        return cls(
            models=tuple(CopulaSpec.from_dict(model) for model in valid[CONF_MODELS]),
            replicates=valid[CONF_REPLICATES],
            n=valid[CONF_N],
            estimators=tuple(dict.fromkeys(valid[CONF_ESTIMATORS])),
            fit=fit,
            kappa_values=tuple(valid.get(CONF_KAPPA_VALUES) or (fit.kappa,)),
            q_values=tuple(valid.get(CONF_Q_VALUES) or (fit.q,)),
            omega_grid=grid_or_default(valid.get(CONF_OMEGA_GRID)),
            delta_grid=grid_or_default(valid.get(CONF_DELTA_GRID)),
            beta_quantile=valid[CONF_BETA_QUANTILE],
            seed=valid[CONF_SEED],
            output_dir=valid[CONF_OUTPUT_DIR],
            threads=valid[CONF_THREADS],
        )

    def variants(self) -> Dict[str, FitConfig]:
        """Boundary-estimator variants, one per (kappa, q) combination."""
        if ESTIMATOR_G not in self.estimators:
            return {}
        combos = list(itertools.product(self.kappa_values, self.q_values))
        if len(combos) == 1:
            kappa, q = combos[0]
            return {ESTIMATOR_G: self.fit.replace(**{CONF_KAPPA: kappa, CONF_Q: q})}
        return {
            f"{ESTIMATOR_G}[kappa={kappa},q={q:g}]": self.fit.replace(**{CONF_KAPPA: kappa, CONF_Q: q})
            for kappa, q in combos
        }

    def echo(self) -> Dict[str, Any]:
        """Return the configuration as a JSON-friendly dictionary."""
        return {
            CONF_MODELS: [model.as_dict() for model in self.models],
            CONF_REPLICATES: self.replicates,
            CONF_N: self.n,
            CONF_ESTIMATORS: list(self.estimators),
            CONF_FIT: self.fit.as_dict(),
            CONF_KAPPA_VALUES: list(self.kappa_values),
            CONF_Q_VALUES: list(self.q_values),
            CONF_OMEGA_GRID: self.omega_grid.tolist(),
            CONF_DELTA_GRID: self.delta_grid.tolist(),
            CONF_BETA_QUANTILE: self.beta_quantile,
            CONF_SEED: self.seed,
            CONF_OUTPUT_DIR: self.output_dir,
        }


def replicate_seed(root: int, model_index: int, replicate: int) -> int:
    """Derive the simulation seed of one replicate from the root seed."""
    return int(np.random.SeedSequence([root, model_index, replicate]).generate_state(1)[0])


@dataclass
class ReplicateOutcome:
    """Everything recorded for one simulated data set."""

    records: List[Dict[str, Any]] = field(default_factory=list)
    failures: List[Dict[str, Any]] = field(default_factory=list)
    degrees: List[Tuple[str, int]] = field(default_factory=list)
    monotone: List[Tuple[str, int, bool]] = field(default_factory=list)
    violations: List[Tuple[str, str, bool]] = field(default_factory=list)


def _summary_records(
    label: str,
    replicate: int,
    estimator: str,
    summary: Optional[DependenceSummary],
    truth: DependenceSummary,
) -> List[Dict[str, Any]]:
    """Long-format rows for every measure; a failed fit (summary None) gives NaN rows."""
    failed = summary is None
    blank_omega = np.full(truth.omega_grid.shape, np.nan)
    blank_delta = np.full(truth.delta_grid.shape, np.nan)
    rows = []
    for name in ("eta", "alpha1", "alpha2", "beta1", "beta2"):
        value = None if failed else getattr(summary, name)
        rows.append(
            _row(label, replicate, estimator, name, np.nan, value, getattr(truth, name), failed)
        )
    estimates = blank_omega if failed else summary.lambda_values
    for omega, value, true in zip(truth.omega_grid, estimates, truth.lambda_values):
        rows.append(_row(label, replicate, estimator, "lambda", omega, value, true, failed))
    for component in (1, 2):
        estimates = blank_delta if failed else summary.tau(component)
        for delta, value, true in zip(truth.delta_grid, estimates, truth.tau(component)):
            rows.append(
                _row(label, replicate, estimator, f"tau{component}", delta, value, true, failed)
            )
    return rows


def _row(model, replicate, estimator, measure, grid, value, truth, failed=False) -> Dict[str, Any]:
    return {
        "model": model,
        "replicate": replicate,
        "estimator": estimator,
        "measure": measure,
        "grid": float(grid),
        "estimate": np.nan if value is None else float(value),
        "truth": np.nan if truth is None else float(truth),
        "failed": failed,
    }


def _baseline_records(
    label: str, replicate: int, baselines: Optional[Dict[str, Any]], truth: DependenceSummary,
    estimators: Tuple[str, ...],
) -> List[Dict[str, Any]]:
    """Long-format baseline rows; failed baselines (None) give NaN rows marked failed."""
    failed = baselines is None
    values = {} if failed else baselines

    def curve(key, grid):
        return values.get(key, np.full(grid.shape, np.nan))

    rows = []
    for estimator, key in ((ESTIMATOR_HILL, "eta_H"), (ESTIMATOR_PENG, "eta_P"),
                           (ESTIMATOR_DRAISMA, "eta_D")):
        if estimator in estimators:
            rows.append(_row(label, replicate, estimator, "eta", np.nan, values.get(key),
                             truth.eta, failed))
    if ESTIMATOR_HILL in estimators:
        lambdas = curve("lambda_H", truth.omega_grid)
        for omega, value, true in zip(truth.omega_grid, lambdas, truth.lambda_values):
            rows.append(_row(label, replicate, ESTIMATOR_HILL, "lambda", omega, value, true, failed))
        for component in (1, 2):
            taus = curve(f"tau{component}_H", truth.delta_grid)
            for delta, value, true in zip(truth.delta_grid, taus, truth.tau(component)):
                rows.append(_row(label, replicate, ESTIMATOR_HILL, f"tau{component}", delta,
                                 value, true, failed))
    if ESTIMATOR_CE_MLE in estimators:
        for component in (1, 2):
            for name in (f"alpha{component}", f"beta{component}"):
                rows.append(_row(label, replicate, ESTIMATOR_CE_MLE, name, np.nan,
                                 values.get(f"{name}_CE"), getattr(truth, name), failed))
    return rows


def run_replicate(
    config: StudyConfig, model_index: int, replicate: int
) -> ReplicateOutcome:
    """Simulate one data set and apply every requested estimator to it."""
    spec = config.models[model_index]
    label = spec.label
    truth = true_measures(spec, config.omega_grid, config.delta_grid)
    outcome = ReplicateOutcome()
    seed = replicate_seed(config.seed, model_index, replicate)
    simulated = sample(spec, config.n, seed)
    # the estimators see ranks only, as they would with real data
    ranked = to_exponential_margins(RawSample(simulated.rows))

    for estimator, fit_config in config.variants().items():
        try:
            fit = estimate(ranked, fit_config)
            summary = summarize(
                fit, ranked, config.omega_grid, config.delta_grid, config.beta_quantile
            )
        except LimitSetError as err:
            _LOGGER.warning("%s replicate %s, %s failed: %s", label, replicate, estimator, err)
            outcome.failures.append(
                {"model": label, "replicate": replicate, "estimator": estimator, "reason": str(err)}
            )
            outcome.records.extend(_summary_records(label, replicate, estimator, None, truth))
            continue
        outcome.records.extend(_summary_records(label, replicate, estimator, summary, truth))
        outcome.degrees.append((estimator, fit.degree))
        for component in (1, 2):
            outcome.monotone.append((estimator, component, is_nondecreasing(summary.tau(component))))
        violated = set(consistency_violations(fit.boundary, summary))
        for name in CONSISTENCY_PROPERTIES:
            outcome.violations.append((estimator, name, name in violated))

    baselines_requested = tuple(e for e in config.estimators if e != ESTIMATOR_G)
    if baselines_requested:
        try:
            baselines = baseline_measures(
                ranked,
                config.omega_grid,
                config.delta_grid,
                eta_exceedances=config.fit.eta_exceedances,
                beta_quantile=config.beta_quantile,
                include=[name for e in baselines_requested for name in ESTIMATOR_BASELINES[e]],
            )
        except LimitSetError as err:
            _LOGGER.warning("%s replicate %s, baselines failed: %s", label, replicate, err)
            for estimator in baselines_requested:
                outcome.failures.append(
                    {"model": label, "replicate": replicate, "estimator": estimator,
                     "reason": str(err)}
                )
            outcome.records.extend(
                _baseline_records(label, replicate, None, truth, baselines_requested)
            )
            return outcome
        outcome.records.extend(
            _baseline_records(label, replicate, baselines, truth, baselines_requested)
        )
        if ESTIMATOR_HILL in baselines_requested:
            for component in (1, 2):
                outcome.monotone.append(
                    (ESTIMATOR_HILL, component, is_nondecreasing(baselines[f"tau{component}_H"]))
                )
        alphas = [baselines.get("alpha1_CE"), baselines.get("alpha2_CE")]
        if all(a is not None for a in alphas):
            for estimator, key in ((ESTIMATOR_HILL, "eta_H"), (ESTIMATOR_PENG, "eta_P"),
                                   (ESTIMATOR_DRAISMA, "eta_D")):
                eta = baselines.get(key)
                if eta is not None:
                    outcome.violations.append((estimator, BASELINE_CONSISTENCY, eta < max(alphas)))
    _LOGGER.debug("Finished %s replicate %s (seed %s)", label, replicate, seed)
    return outcome


def _run_job(args: Tuple[StudyConfig, int, int]) -> ReplicateOutcome:
    return run_replicate(*args)


def summarize_records(records: pd.DataFrame) -> pd.DataFrame:
    """Bias, RMSE and 95% bands per (model, estimator, measure, grid) cell."""
    if records.empty:
        return pd.DataFrame(columns=SUMMARY_COLUMNS)
    rows = []
    keys = ["model", "estimator", "measure", "grid"]
    for (model, estimator, measure, grid), cell in records.groupby(keys, sort=True, dropna=False):
        values = cell["estimate"].to_numpy(dtype=float)
        failed = cell["failed"].to_numpy(dtype=bool)
        finite = values[~np.isnan(values)]
        truth = float(cell["truth"].iloc[0])
        error = finite - truth
        rows.append(
            {
                "model": model,
                "estimator": estimator,
                "measure": measure,
                "grid": grid,
                "truth": truth,
                "estimates": finite.size,
                "not_estimable": int(np.sum(np.isnan(values) & ~failed)),
                "failures": int(failed.sum()),
                "mean": float(finite.mean()) if finite.size else np.nan,
                "bias": float(error.mean()) if finite.size else np.nan,
                "rmse": float(np.sqrt(np.mean(error**2))) if finite.size else np.nan,
                "q025": float(np.quantile(finite, 0.025)) if finite.size else np.nan,
                "q975": float(np.quantile(finite, 0.975)) if finite.size else np.nan,
            }
        )
    return pd.DataFrame(rows, columns=SUMMARY_COLUMNS)


@dataclass
class StudyResult:
    """Result tables and the JSON report of a study."""

    tables: Dict[str, pd.DataFrame]
    report: Dict[str, Any]


def run_study(config: StudyConfig) -> StudyResult:
    """Run every (model, replicate) job and aggregate the result tables."""
    jobs = [
        (config, model_index, replicate)
        for model_index in range(len(config.models))
        for replicate in range(config.replicates)
    ]
    if not jobs:
        _LOGGER.warning("Study has zero replicates; writing empty tables")
    _LOGGER.info(
        "Running %s replicates for %s models with %s worker(s)",
        config.replicates, len(config.models), config.threads,
    )
    if config.threads > 1 and jobs:
        with ProcessPoolExecutor(max_workers=config.threads) as executor:
            outcomes = list(executor.map(_run_job, jobs))
    else:
        outcomes = [_run_job(job) for job in jobs]

    labels = {config.models[index].label: index for index in range(len(config.models))}
    records = pd.DataFrame(
        [row for outcome in outcomes for row in outcome.records], columns=REPLICATE_COLUMNS
    )
    failures = pd.DataFrame(
        [row for outcome in outcomes for row in outcome.failures], columns=FAILURE_COLUMNS
    )

    degree_rows, monotone_rows, consistency_rows = [], [], []
    for (model_index, _), outcome in zip(((job[1], job[2]) for job in jobs), outcomes):
        label = config.models[model_index].label
        degree_rows.extend({"model": label, "estimator": e, "degree": d} for e, d in outcome.degrees)
        monotone_rows.extend(
            {"model": label, "estimator": e, "component": c, "ok": ok} for e, c, ok in outcome.monotone
        )
        consistency_rows.extend(
            {"model": label, "estimator": e, "property": p, "violated": v}
            for e, p, v in outcome.violations
        )

    tables = {
        FILE_STUDY_REPLICATES: records,
        FILE_STUDY_SUMMARY: summarize_records(records),
        FILE_STUDY_DEGREES: _degree_table(degree_rows, config),
        FILE_STUDY_MONOTONICITY: _monotonicity_table(monotone_rows),
        FILE_STUDY_CONSISTENCY: _consistency_table(consistency_rows),
    }
    report = {
        "config": config.echo(),
        "models": {
            label: {
                "index": index,
                "truth": true_measures(config.models[index], config.omega_grid, config.delta_grid).as_dict(),
                "seeds": [replicate_seed(config.seed, index, r) for r in range(config.replicates)],
            }
            for label, index in labels.items()
        },
        "failures": failures.to_dict(orient="records"),
        "failure_count": int(len(failures)),
        "replicates_run": len(jobs),
    }
    return StudyResult(tables=tables, report=report)


def _degree_table(rows: List[Dict[str, Any]], config: StudyConfig) -> pd.DataFrame:
    if not rows:
        return pd.DataFrame(columns=DEGREE_COLUMNS)
    frame = pd.DataFrame(rows)
    counts = frame.groupby(["model", "estimator", "degree"]).size().rename("count").reset_index()
    # every configured degree gets a row, chosen or not
    full = pd.MultiIndex.from_product(
        [counts["model"].unique(), counts["estimator"].unique(), list(config.fit.degrees)],
        names=["model", "estimator", "degree"],
    )
    counts = counts.set_index(["model", "estimator", "degree"]).reindex(full, fill_value=0)
    return counts.reset_index()[DEGREE_COLUMNS]


def _monotonicity_table(rows: List[Dict[str, Any]]) -> pd.DataFrame:
    if not rows:
        return pd.DataFrame(columns=MONOTONICITY_COLUMNS)
    frame = pd.DataFrame(rows)
    table = (
        frame.groupby(["model", "estimator", "component"])["ok"]
        .agg(replicates="size", nondecreasing="sum")
        .reset_index()
    )
    table["nondecreasing"] = table["nondecreasing"].astype(int)
    table["rate"] = table["nondecreasing"] / table["replicates"]
    return table[MONOTONICITY_COLUMNS]


def _consistency_table(rows: List[Dict[str, Any]]) -> pd.DataFrame:
    if not rows:
        return pd.DataFrame(columns=CONSISTENCY_COLUMNS)
    frame = pd.DataFrame(rows)
    table = (
        frame.groupby(["model", "estimator", "property"])["violated"]
        .agg(checked="size", violated="sum")
        .reset_index()
    )
    table["violated"] = table["violated"].astype(int)
    table["rate_satisfied"] = 1.0 - table["violated"] / table["checked"]
    return table[CONSISTENCY_COLUMNS]


def write_study(result: StudyResult, output_dir: str) -> Dict[str, str]:
    """Write the result tables and the JSON report; return the written paths."""
    os.makedirs(output_dir, exist_ok=True)
    paths = {}
    for name, table in result.tables.items():
        path = os.path.join(output_dir, name)
        write_table(table, path)
        paths[name] = path
    report_path = os.path.join(output_dir, FILE_STUDY_REPORT)
    write_json(result.report, report_path)
    paths[FILE_STUDY_REPORT] = report_path
    _LOGGER.info("Study results written to %s", output_dir)
    return paths


def study_from_settings(settings: Dict[str, Any], output_dir: Optional[str] = None) -> StudyConfig:
    """Build a study configuration, letting an explicit output directory win."""
    data = dict(settings)
    if output_dir is not None:
        data[CONF_OUTPUT_DIR] = output_dir
    return StudyConfig.from_dict(data)

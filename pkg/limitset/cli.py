"""Command-line interface: simulate, fit, measures and study."""
import argparse
import json
import logging
import os
from typing import Any, Dict, List, Optional, Sequence

from .config import SIMULATE_SCHEMA, FitConfig, grid_or_default, merge_settings, validate_input
from .const import (
    ALL_BASELINES,
    ATTR_CONFIG,
    ATTR_ETA_H,
    ATTR_INTERVALS,
    ATTR_SEED,
    CONF_BETA_QUANTILE,
    CONF_BLOCK_MEAN,
    CONF_DEGREES,
    CONF_DELTA_GRID,
    CONF_ESTIMATORS,
    CONF_FAMILY,
    CONF_FIT,
    CONF_GAMMA,
    CONF_K,
    CONF_KAPPA,
    CONF_M,
    CONF_MODELS,
    CONF_N,
    CONF_OMEGA_GRID,
    CONF_OUTPUT_DIR,
    CONF_Q,
    CONF_Q_U,
    CONF_REPLICATES,
    CONF_RHO,
    CONF_SCALING,
    CONF_SEED,
    CONF_THETA1,
    CONF_THETA2,
    CONF_THREADS,
    DEFAULT_BETA_QUANTILE,
    DEFAULT_BLOCK_MEAN,
    DEFAULT_OUTPUT_DIR,
    DEFAULT_SEED,
    ENV_OUTPUT_DIR,
    EXIT_OK,
    FILE_BOUNDARY,
    FILE_DEGREE_BOUNDARY,
    FILE_LAMBDA_GRID,
    FILE_LOCAL_BOUNDARY,
    FILE_POLAR,
    FILE_REPLICATE_BOUNDARY,
    FILE_REPORT,
    FILE_SAMPLE,
    FILE_SUMMARY,
    FILE_TAU_GRID,
    NAME,
    SCALING_NAIVE,
    SCALING_TRUNCATE,
    VERSION,
)
from .copulas import CopulaSpec, sample as simulate_sample
from .errors import ConfigValidationError, DataValidationError, LimitSetError, NumericalError
from .files import (
    read_boundary_csv,
    read_sample_csv,
    write_boundary_csv,
    write_json,
    write_lambda_csv,
    write_polar_csv,
    write_sample_csv,
    write_tau_csv,
)
from .local import estimate_local, eta_for_scaling
from .margins import to_exponential_margins, to_polar
from .measures import baseline_measures, boundary_summary, summarize
from .resample import BootstrapPlan, bootstrap_measures
from .smooth import estimate
from .study import run_study, study_from_settings, write_study

_LOGGER = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
METHOD_LOCAL = "local"
METHOD_SMOOTH = "smooth"
COPULA_KEYS = (CONF_FAMILY, CONF_RHO, CONF_GAMMA, CONF_THETA1, CONF_THETA2)


def load_strings() -> Dict[str, Any]:
    """Load the user-facing message catalog."""
    path = os.path.join(os.path.dirname(__file__), "strings.json")
    with open(path, encoding="utf-8") as handle:
        return json.load(handle)


STRINGS = load_strings()


def load_config_file(path: Optional[str]) -> Dict[str, Any]:
    """Read a JSON settings file; a missing path gives empty settings."""
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as handle:
            data = json.load(handle)
    except (OSError, json.JSONDecodeError) as err:
        raise ConfigValidationError(
            STRINGS["error"]["bad_config_file"].format(path=path, detail=err)
        ) from err
    if not isinstance(data, dict):
        raise ConfigValidationError(
            STRINGS["error"]["bad_config_file"].format(path=path, detail="expected a JSON object")
        )
    return data


def output_dir(args: argparse.Namespace, settings: Dict[str, Any]) -> str:
    """Flag, then config file, then $LIMITSET_OUTPUT_DIR, then the built-in default."""
    return (
        args.output_dir
        or settings.get(CONF_OUTPUT_DIR)
        or os.environ.get(ENV_OUTPUT_DIR)
        or DEFAULT_OUTPUT_DIR
    )


def parse_list(text: Optional[str], cast=str) -> Optional[List[Any]]:
    """Split a comma-separated flag value; None stays None."""
    if text is None:
        return None
    try:
        return [cast(item.strip()) for item in text.split(",") if item.strip()]
    except ValueError as err:
        raise ConfigValidationError(f"Cannot parse list {text!r}: {err}") from err


def parse_baselines(text: Optional[str]) -> List[str]:
    """Turn the --baselines flag into a list of baseline names."""
    if text is None or text.strip().lower() == "none":
        return []
    if text.strip().lower() == "all":
        return list(ALL_BASELINES)
    names = parse_list(text.lower())
    unknown = [name for name in names if name not in ALL_BASELINES]
    if unknown:
        raise ConfigValidationError(
            f"Unknown baselines {unknown}; choose from {', '.join(ALL_BASELINES)}"
        )
    return names


def fit_config(args: argparse.Namespace, settings: Dict[str, Any]) -> FitConfig:
    """Tuning parameters from flags over the config file's fit section."""
    flags = {
        CONF_K: args.k,
        CONF_M: args.m,
        CONF_Q_U: args.q_u,
        CONF_Q: args.q,
        CONF_KAPPA: args.kappa,
        CONF_DEGREES: parse_list(args.degrees, int),
        CONF_SCALING: args.scaling,
    }
    return FitConfig.from_dict(merge_settings(settings.get(CONF_FIT), flags))


def cmd_simulate(args: argparse.Namespace) -> None:
    """Write a simulated sample on exponential margins."""
    settings = merge_settings(
        load_config_file(args.config),
        {key: getattr(args, key) for key in COPULA_KEYS},
        {CONF_N: args.n, CONF_SEED: args.seed},
    )
    spec = CopulaSpec.from_dict({key: settings.get(key) for key in COPULA_KEYS})
    run = validate_input(SIMULATE_SCHEMA, settings)
    path = args.out or os.path.join(output_dir(args, settings), FILE_SAMPLE)
    data = simulate_sample(spec, run[CONF_N], run[CONF_SEED])
    write_sample_csv(data, path)
    print(STRINGS["commands"]["simulate"]["done"].format(n=data.n, path=path, seed=run[CONF_SEED]))


def cmd_fit(args: argparse.Namespace) -> None:
    """Estimate the boundary set and write it with a JSON report."""
    settings = load_config_file(args.config)
    config = fit_config(args, settings)
    settings = merge_settings(
        settings,
        {
            CONF_OMEGA_GRID: args.omega_grid,
            CONF_DELTA_GRID: args.delta_grid,
            CONF_BETA_QUANTILE: args.beta_quantile,
            CONF_SEED: args.seed,
            CONF_THREADS: args.threads,
            CONF_BLOCK_MEAN: args.block_mean,
        },
    )
    omega_grid = grid_or_default(settings.get(CONF_OMEGA_GRID))
    delta_grid = grid_or_default(settings.get(CONF_DELTA_GRID))
    beta_quantile = settings.get(CONF_BETA_QUANTILE, DEFAULT_BETA_QUANTILE)
    directory = output_dir(args, settings)

    raw = read_sample_csv(args.input, header=not args.no_header)
    sample = to_exponential_margins(raw)
    write_polar_csv(to_polar(sample), os.path.join(directory, FILE_POLAR))
    if args.method == METHOD_LOCAL:
        eta_h = eta_for_scaling(sample, config)
        boundary, local = estimate_local(sample, config, eta_h=eta_h)
        report: Dict[str, Any] = {
            ATTR_ETA_H: eta_h,
            "x_star": boundary.x_star,
            ATTR_CONFIG: config.as_dict(),
            "local_fits": local.records(),
        }
        summary = summarize(boundary, sample, omega_grid, delta_grid, beta_quantile)
        degree = None
    else:
        fit = estimate(sample, config, threads=settings.get(CONF_THREADS, 1))
        boundary = fit.boundary
        report = fit.report()
        write_boundary_csv(fit.local_boundary, os.path.join(directory, FILE_LOCAL_BOUNDARY))
        for candidate_degree, candidate in fit.candidates.items():
            write_boundary_csv(
                candidate.boundary,
                os.path.join(directory, FILE_DEGREE_BOUNDARY.format(degree=candidate_degree)),
            )
        summary = summarize(fit, sample, omega_grid, delta_grid, beta_quantile)
        degree = fit.degree
    report["method"] = args.method
    report["input"] = os.path.basename(args.input)
    report["n"] = raw.n
    report["measures"] = summary.as_dict()

    if args.bootstrap:
        plan = BootstrapPlan.from_dict(
            {
                CONF_N: raw.n,
                CONF_BLOCK_MEAN: settings.get(CONF_BLOCK_MEAN, DEFAULT_BLOCK_MEAN),
                CONF_REPLICATES: args.bootstrap,
                CONF_SEED: settings.get(CONF_SEED, DEFAULT_SEED),
            }
        )
        result = bootstrap_measures(
            raw, config, plan, omega_grid, delta_grid,
            beta_quantile=beta_quantile, threads=settings.get(CONF_THREADS, 1),
        )
        for replicate, replicate_boundary in enumerate(result.boundaries):
            if replicate_boundary is not None:
                write_boundary_csv(
                    replicate_boundary,
                    os.path.join(
                        directory, "bootstrap", FILE_REPLICATE_BOUNDARY.format(replicate=replicate)
                    ),
                )
        report[ATTR_INTERVALS] = result.intervals
        report[ATTR_SEED] = plan.seed
        report["bootstrap"] = {
            CONF_REPLICATES: plan.replicates,
            CONF_BLOCK_MEAN: plan.mean_block,
            "succeeded": len(result.succeeded),
            "failures": {str(b): reason for b, reason in result.failures.items()},
        }

    path = os.path.join(directory, FILE_BOUNDARY)
    write_boundary_csv(boundary, path)
    write_json(report, os.path.join(directory, FILE_REPORT))
    print(STRINGS["commands"]["fit"]["done"].format(path=path, degree=degree or args.method))


def cmd_measures(args: argparse.Namespace) -> None:
    """Compute dependence measures from a boundary file."""
    settings = merge_settings(
        load_config_file(args.config),
        {
            CONF_OMEGA_GRID: args.omega_grid,
            CONF_DELTA_GRID: args.delta_grid,
            CONF_BETA_QUANTILE: args.beta_quantile,
        },
    )
    omega_grid = grid_or_default(settings.get(CONF_OMEGA_GRID))
    delta_grid = grid_or_default(settings.get(CONF_DELTA_GRID))
    beta_quantile = settings.get(CONF_BETA_QUANTILE, DEFAULT_BETA_QUANTILE)
    baselines = parse_baselines(args.baselines)

    boundary = read_boundary_csv(args.boundary)
    if args.sample:
        sample = to_exponential_margins(read_sample_csv(args.sample, header=not args.no_header))
        summary = summarize(boundary, sample, omega_grid, delta_grid, beta_quantile)
        if baselines:
            summary.baselines = baseline_measures(
                sample, omega_grid, delta_grid, beta_quantile=beta_quantile, include=baselines
            )
    elif baselines:
        raise ConfigValidationError(STRINGS["error"]["baselines_need_sample"])
    else:
        summary = boundary_summary(boundary, omega_grid, delta_grid, source=boundary.source)

    directory = output_dir(args, settings)
    path = os.path.join(directory, FILE_SUMMARY)
    write_json(summary.as_dict(), path)
    write_lambda_csv(summary, os.path.join(directory, FILE_LAMBDA_GRID))
    write_tau_csv(summary, os.path.join(directory, FILE_TAU_GRID))
    print(STRINGS["commands"]["measures"]["done"].format(path=path, eta=summary.eta))


def cmd_study(args: argparse.Namespace) -> None:
    """Run a replication study and write its tables."""
    flags: Dict[str, Any] = {
        CONF_REPLICATES: args.replicates,
        CONF_N: args.n,
        CONF_SEED: args.seed,
        CONF_THREADS: args.threads,
        CONF_ESTIMATORS: parse_list(args.estimators),
        CONF_OMEGA_GRID: args.omega_grid,
        CONF_DELTA_GRID: args.delta_grid,
    }
    if args.family:
        flags[CONF_MODELS] = [{key: getattr(args, key) for key in COPULA_KEYS}]
    settings = merge_settings(load_config_file(args.config), flags)
    if not settings.get(CONF_MODELS):
        raise ConfigValidationError(STRINGS["error"]["no_models"])
    config = study_from_settings(settings, output_dir(args, settings))
    result = run_study(config)
    write_study(result, config.output_dir)
    print(
        STRINGS["commands"]["study"]["done"].format(
            path=config.output_dir,
            replicates=result.report["replicates_run"],
            failures=result.report["failure_count"],
        )
    )


def _add_copula_flags(parser: argparse.ArgumentParser, help_text: Dict[str, str]) -> None:
    parser.add_argument("--family", help=help_text["family"])
    parser.add_argument("--rho", type=float, help=help_text["rho"])
    parser.add_argument("--gamma", type=float, help=help_text["gamma"])
    parser.add_argument("--theta1", type=float, help=help_text["theta1"])
    parser.add_argument("--theta2", type=float, help=help_text["theta2"])


def _add_grid_flags(parser: argparse.ArgumentParser) -> None:
    help_text = STRINGS["commands"]["measures"]["data"]
    parser.add_argument("--omega-grid", dest="omega_grid", help=help_text["omega_grid"])
    parser.add_argument("--delta-grid", dest="delta_grid", help=help_text["delta_grid"])


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser with its four subcommands."""
    text = STRINGS["cli"]["arguments"]
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help=text["config"])
    common.add_argument("--output-dir", dest="output_dir", help=text["output_dir"])
    common.add_argument("--seed", type=int, help=text["seed"])
    common.add_argument("--threads", type=int, help=text["threads"])
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help=text["verbose"])
    verbosity.add_argument("-q", "--quiet", action="store_true", help=text["quiet"])

    parser = argparse.ArgumentParser(prog=NAME, description=STRINGS["cli"]["description"])
    parser.add_argument("--version", action="version", version=f"{NAME} {VERSION}")
    commands = parser.add_subparsers(dest="command", required=True)

    simulate_text = STRINGS["commands"]["simulate"]
    simulate = commands.add_parser("simulate", parents=[common], help=simulate_text["help"])
    _add_copula_flags(simulate, simulate_text["data"])
    simulate.add_argument("--n", type=int, help=simulate_text["data"]["n"])
    simulate.add_argument("--out", help=simulate_text["data"]["out"])
    simulate.set_defaults(handler=cmd_simulate)

    fit_text = STRINGS["commands"]["fit"]["data"]
    fit = commands.add_parser("fit", parents=[common], help=STRINGS["commands"]["fit"]["help"])
    fit.add_argument("input", help=fit_text["input"])
    fit.add_argument("--no-header", action="store_true", help=text["no_header"])
    fit.add_argument(
        "--method", choices=[METHOD_LOCAL, METHOD_SMOOTH], default=METHOD_SMOOTH,
        help=fit_text["method"],
    )
    fit.add_argument("--k", type=int, help=fit_text["k"])
    fit.add_argument("--m", type=int, help=fit_text["m"])
    fit.add_argument("--q-u", dest="q_u", type=float, help=fit_text["q_u"])
    fit.add_argument("--q", type=float, help=fit_text["q"])
    fit.add_argument("--kappa", type=int, help=fit_text["kappa"])
    fit.add_argument("--degrees", help=fit_text["degrees"])
    fit.add_argument("--scaling", choices=[SCALING_TRUNCATE, SCALING_NAIVE], help=fit_text["scaling"])
    fit.add_argument("--bootstrap", type=int, default=0, help=fit_text["bootstrap"])
    fit.add_argument("--block-mean", dest="block_mean", type=float, help=fit_text["block_mean"])
    fit.add_argument(
        "--beta-quantile", dest="beta_quantile", type=float,
        help=STRINGS["commands"]["measures"]["data"]["beta_quantile"],
    )
    _add_grid_flags(fit)
    fit.set_defaults(handler=cmd_fit)

    measures_text = STRINGS["commands"]["measures"]
    measures = commands.add_parser("measures", parents=[common], help=measures_text["help"])
    measures.add_argument("boundary", help=measures_text["data"]["boundary"])
    measures.add_argument("--sample", help=measures_text["data"]["sample"])
    measures.add_argument("--no-header", action="store_true", help=text["no_header"])
    measures.add_argument("--baselines", default="none", help=measures_text["data"]["baselines"])
    measures.add_argument(
        "--beta-quantile", dest="beta_quantile", type=float,
        help=measures_text["data"]["beta_quantile"],
    )
    _add_grid_flags(measures)
    measures.set_defaults(handler=cmd_measures)

    study_text = STRINGS["commands"]["study"]
    study = commands.add_parser("study", parents=[common], help=study_text["help"])
    _add_copula_flags(study, simulate_text["data"])
    study.add_argument("--replicates", type=int, help=study_text["data"]["replicates"])
    study.add_argument("--n", type=int, help=study_text["data"]["n"])
    study.add_argument("--estimators", help=study_text["data"]["estimators"])
    _add_grid_flags(study)
    study.set_defaults(handler=cmd_study)
    return parser


def configure_logging(verbose: bool = False, quiet: bool = False) -> None:
    """Configure root logging with the project's format."""
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(
        level=level, format=LOG_FORMAT, handlers=[logging.StreamHandler()], force=True
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run the command line and return the process exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose, args.quiet)
    errors = STRINGS["error"]
    try:
        args.handler(args)
    except ConfigValidationError as err:
        _LOGGER.error(errors["config"].format(detail=err))
        return err.exit_code
    except DataValidationError as err:
        _LOGGER.error(errors["data"].format(detail=err))
        return err.exit_code
    except NumericalError as err:
        _LOGGER.error(errors["numerical"].format(detail=err))
        return err.exit_code
    except LimitSetError as err:
        _LOGGER.error(errors["unknown"].format(detail=err))
        return err.exit_code
    return EXIT_OK

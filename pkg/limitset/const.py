"""Constants for the limitset package."""

# Base package constants
NAME = "limitset"
VERSION = "0.1.0"

# Configuration keys
CONF_K = "k"
CONF_M = "m"
CONF_Q_U = "q_u"
CONF_Q = "q"
CONF_KAPPA = "kappa"
CONF_DEGREES = "degrees"
CONF_SCALING = "scaling"
CONF_ETA_EXCEEDANCES = "eta_exceedances"
CONF_MIN_GPD_EXCESSES = "min_gpd_excesses"
CONF_MIN_GAM_EXCEEDANCES = "min_gam_exceedances"

CONF_FAMILY = "family"
CONF_RHO = "rho"
CONF_GAMMA = "gamma"
CONF_THETA1 = "theta1"
CONF_THETA2 = "theta2"

CONF_N = "n"
CONF_SEED = "seed"
CONF_BLOCK_MEAN = "block_mean"
CONF_REPLICATES = "replicates"

CONF_MODELS = "models"
CONF_ESTIMATORS = "estimators"
CONF_KAPPA_VALUES = "kappa_values"
CONF_Q_VALUES = "q_values"
CONF_FIT = "fit"
CONF_OMEGA_GRID = "omega_grid"
CONF_DELTA_GRID = "delta_grid"
CONF_BETA_QUANTILE = "beta_quantile"
CONF_OUTPUT_DIR = "output_dir"
CONF_THREADS = "threads"

# Copula families
FAMILY_GAUSSIAN = "gaussian"
FAMILY_LOGISTIC = "logistic"
FAMILY_INVERTED_LOGISTIC = "inverted_logistic"
FAMILY_ASYMMETRIC_LOGISTIC = "asymmetric_logistic"

# Scaling modes
SCALING_TRUNCATE = "truncate"
SCALING_NAIVE = "naive"

# Boundary source tags
SOURCE_LOCAL = "local"
SOURCE_SMOOTH = "smooth-degree-{degree}"

# Estimator names used in reports and study tables
ESTIMATOR_G = "G"
ESTIMATOR_HILL = "H"
ESTIMATOR_PENG = "P"
ESTIMATOR_DRAISMA = "D"
ESTIMATOR_CE_MLE = "CE"
BASELINE_ESTIMATORS = (ESTIMATOR_HILL, ESTIMATOR_PENG, ESTIMATOR_DRAISMA, ESTIMATOR_CE_MLE)
ALL_ESTIMATORS = (ESTIMATOR_G,) + BASELINE_ESTIMATORS

# Baseline selections accepted by the measures command
BASELINE_HILL_ETA = "hill-eta"
BASELINE_PENG = "peng"
BASELINE_DRAISMA = "draisma"
BASELINE_HILL_LAMBDA = "hill-lambda"
BASELINE_HILL_TAU = "hill-tau"
BASELINE_CE = "ce"
ALL_BASELINES = (
    BASELINE_HILL_ETA,
    BASELINE_PENG,
    BASELINE_DRAISMA,
    BASELINE_HILL_LAMBDA,
    BASELINE_HILL_TAU,
    BASELINE_CE,
)
ESTIMATOR_BASELINES = {
    ESTIMATOR_HILL: (BASELINE_HILL_ETA, BASELINE_HILL_LAMBDA, BASELINE_HILL_TAU),
    ESTIMATOR_PENG: (BASELINE_PENG,),
    ESTIMATOR_DRAISMA: (BASELINE_DRAISMA,),
    ESTIMATOR_CE_MLE: (BASELINE_CE,),
}

# Tuning defaults
DEFAULT_K = 199
DEFAULT_M = 100
DEFAULT_Q_U = 0.5
DEFAULT_Q = 0.999
DEFAULT_KAPPA = 7
DEFAULT_DEGREES = (1, 2, 3)
DEFAULT_ETA_EXCEEDANCES = 500
DEFAULT_MIN_GPD_EXCESSES = 10
DEFAULT_MIN_GAM_EXCEEDANCES = 50

# GPD fitting
XI_LOWER = -0.95
XI_UPPER = 1.0
XI_TOL = 1e-6

# Baseline defaults
DEFAULT_PENG_C = 500
DEFAULT_LAMBDA_QUANTILE = 0.95
DEFAULT_TAU_QUANTILE = 0.85
DEFAULT_TAU_MIN_POINTS = 20
DEFAULT_BETA_QUANTILE = 0.9
DEFAULT_BETA_MIN_EXCEEDANCES = 50

# Bootstrap defaults
DEFAULT_BLOCK_MEAN = 16.0
DEFAULT_REPLICATES = 100
DEFAULT_INTERVAL_LEVELS = (0.5, 0.95)

# Study defaults
DEFAULT_STUDY_N = 10000
DEFAULT_STUDY_REPLICATES = 100
DEFAULT_SEED = 1
DEFAULT_GRID_STEP = 0.01

# Environment
ENV_OUTPUT_DIR = "LIMITSET_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "limitset-output"

# Output file names
FILE_SAMPLE = "sample.csv"
FILE_POLAR = "polar.csv"
FILE_BOUNDARY = "boundary.csv"
FILE_LOCAL_BOUNDARY = "boundary_local.csv"
FILE_DEGREE_BOUNDARY = "boundary_degree{degree}.csv"
FILE_REPLICATE_BOUNDARY = "boundary_replicate{replicate:04d}.csv"
FILE_REPORT = "report.json"
FILE_SUMMARY = "summary.json"
FILE_LAMBDA_GRID = "lambda.csv"
FILE_TAU_GRID = "tau.csv"
FILE_STUDY_REPLICATES = "replicates.csv"
FILE_STUDY_SUMMARY = "summary.csv"
FILE_STUDY_DEGREES = "degrees.csv"
FILE_STUDY_MONOTONICITY = "monotonicity.csv"
FILE_STUDY_CONSISTENCY = "consistency.csv"
FILE_STUDY_REPORT = "study.json"

# Report attributes
ATTR_DEGREE = "degree"
ATTR_MAE = "mae"
ATTR_ETA_H = "eta_h"
ATTR_CONFIG = "config"
ATTR_SEED = "seed"
ATTR_INTERVALS = "intervals"
ATTR_FAILURES = "failures"

# Exit codes
EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4

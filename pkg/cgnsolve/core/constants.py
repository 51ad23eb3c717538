"""
Centralized constants for cgn-solve.

This module contains every numeric default used across the solvers, the ODE integrator,
the benchmark problems and the experiment harness.
"""

# Cluster Gauss-Newton defaults
DEFAULT_CLUSTER_SIZE = 250
DEFAULT_LAMBDA_INIT = 0.01
DEFAULT_LAMBDA_MAX = 1e10
DEFAULT_GAMMA = 1.0
DEFAULT_K_MAX = 100
DEFAULT_MAX_RESAMPLE = 100
WEIGHT_CAP = 1e12  # weight given to a point coincident with the anchor (gamma > 0)
LAMBDA_DECREASE = 0.1
LAMBDA_INCREASE = 10.0

# Levenberg-Marquardt baseline
LM_FD_STEP_DEFAULT = 1e-6  # solver "default" finite-difference step
LM_FD_STEP_SQRT_ABSTOL = 1e-3  # sqrt(AbsTol) of the ODE solve
LM_STEP_TOL = 1e-6
LM_SSR_TOL = 1e-6
LM_LAMBDA_CAP = 1e10
LM_EVALS_PER_DIM = 200

# ODE integrator
ODE_REL_TOL = 1e-3
ODE_ABS_TOL = 1e-6
ODE_MAX_STEPS = 200_000
ODE_MIN_STEP_FACTOR = 0.2
ODE_MAX_STEP_FACTOR = 6.0
ODE_SAFETY = 0.9
ODE_REJECT_FACTOR = 0.1
ODE_STEP_FLOOR = 1e-12  # relative to max(1, |t|)

# Synthetic data
DEFAULT_NOISE_SD_FRAC = 0.10
NOISE_CLIP_SIGMAS = 5.0
ZERO_NOISE_ACCEPT_SSR = 1e-8

# Residual scales
RESIDUAL_SCALE_LOG10 = "log10"
RESIDUAL_SCALE_LINEAR = "linear"
RESIDUAL_SCALES = (RESIDUAL_SCALE_LOG10, RESIDUAL_SCALE_LINEAR)

# Solvers
SOLVER_CGN = "cgn"
SOLVER_LM = "lm"
SOLVER_LM_DEF = "lm_def"
SOLVERS = (SOLVER_CGN, SOLVER_LM, SOLVER_LM_DEF)
LM_FD_STEPS = {SOLVER_LM: LM_FD_STEP_DEFAULT, SOLVER_LM_DEF: LM_FD_STEP_SQRT_ABSTOL}

# Sweeps
SWEEP_GAMMA = "gamma"
SWEEP_LAMBDA_INIT = "lambda_init"
SWEEP_AXES = (SWEEP_GAMMA, SWEEP_LAMBDA_INIT)

# Threshold curves
THRESHOLD_GRID_POINTS = 200
THRESHOLD_GRID_LOW = 1e-4
THRESHOLD_GRID_HIGH = 1e2

# Artifact files
CLUSTER_FINAL_CSV = "cluster_final.csv"
TRACE_CSV = "trace.csv"
HISTORY_CSV = "history.csv"
THRESHOLD_CURVE_CSV = "threshold_curve.csv"
EVAL_CURVE_CSV = "eval_curve.csv"
PARAMETER_SPREAD_CSV = "parameter_spread.csv"
LM_RESULTS_CSV = "lm_results.csv"
SUMMARY_JSON = "summary.json"
SPEC_JSON = "spec.json"
SWEEP_CURVES_CSV = "sweep_threshold_curves.csv"
COMPARISON_CSV = "comparison.csv"
DATASET_CSV = "dataset.csv"
DATASET_JSON = "dataset.json"
CSV_SIGNIFICANT_DIGITS = 17

# Environment variables
ENV_LOG_LEVEL = "CGN_SOLVE_LOG_LEVEL"
ENV_WORKERS = "CGN_SOLVE_WORKERS"

# CLI exit codes
EXIT_CONFIG_ERROR = 2
EXIT_RUNTIME_ERROR = 3

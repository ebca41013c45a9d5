"""
SLOPE-AMP - Main Configuration
All defaults are defined in code; run configurations only override them
"""

# General
DEFAULT_SEED = 0
SEED_ENV_VAR = "SLOPE_AMP_SEED"
DEFAULT_OUT_DIR = "results"
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
LOG_LEVEL = "INFO"

# Sorted-L1 core
TIE_RTOL = 1e-10  # atoms merge when magnitudes differ by <= TIE_RTOL * max(1, max|v|)
SUBGRADIENT_RTOL = 1e-10

# AMP
AMP_MAX_ITER = 500
AMP_OPT_TOL = 1e-12

# State evolution (Monte Carlo)
SE_P = 1000
SE_MC_REPS = 64
SE_FP_TOL = 1e-6
SE_MAX_FP_ITER = 200
SE_DELTA = 0.5
SE_SIGMA_W = 0.0

# A_min search / calibration
AMIN_RTOL = 1e-3
CALIBRATION_RTOL = 1e-3
CALIBRATION_MAX_DOUBLINGS = 40  # cap: 2**40 * a_1
CALIBRATION_MIN_START = 1e-3  # first upper guess when the A_min scale is 0 (delta >= 1)

# Baselines
POWER_ITER_TOL = 1e-8
POWER_ITER_MAX_ITER = 20000
STEP_MARGIN = 1e-4  # step is 1 / (sigma_max^2 (1 + STEP_MARGIN))
ISTA_MAX_ITER = 30000
FISTA_MAX_ITER = 5000
BASELINE_OPT_TOL = 1e-14
REFERENCE_OPT_TOL = 1e-20
REFERENCE_KKT_TOL = 1e-6  # untoleranced subgradient distance of the polished reference
REFERENCE_POLISH_ITER = 1000
REFERENCE_MAX_ITER = 100000

# Experiments
BENCH_THRESHOLDS = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6]
REFERENCE_SUPPORT_RTOL = 1e-10
# "effective": compare against the SLOPE minimizer for the weights the AMP fixed point
# actually solves; "nominal": against the minimizer for the requested weights
REFERENCE_TARGETS = ('effective', 'nominal')
REFERENCE_TARGET = 'effective'
SE_TRACKING_ITERS = 10
MSE_N_SEEDS = 20

# Counter-based RNG roles: every stream is keyed by (seed, role, index)
RNG_ROLES = {
    'design': 0,
    'signal': 1,
    'noise': 2,
    'se': 3,
    'f_alpha': 4,
    'power': 5,
}

# Exit codes
EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_CONFIG_ERROR = 2
EXIT_NUMERIC_FAILURE = 3
EXIT_NON_CONVERGENCE = 4
EXIT_CALIBRATION_ERROR = 5

# CSV schemas (stable across versions)
BENCH_REPORT_COLUMNS = ['solver', 'threshold', 'first_iter']
TRACE_COLUMNS = ['solver', 'iter', 'opt_error', 'set_diff', 'cost', 'tau_hat']
SE_TRAJECTORY_COLUMNS = ['iter', 'tau_sq']
MSE_REPORT_COLUMNS = ['n', 'p', 'delta', 'sigma_w', 'empirical_mse', 'stderr', 'predicted_mse']

# Output file names
OUTPUT_FILES = {
    'prox': 'prox.csv',
    'solution': 'solution.csv',
    'trace': 'trace.csv',
    'solve_summary': 'solve_summary.json',
    'se_trajectory': 'se_trajectory.csv',
    'se_summary': 'se_summary.json',
    'alpha': 'alpha.json',
    'bench_report': 'bench_report.csv',
    'bench_trace': 'bench_trace.csv',
    'bench_summary': 'bench_summary.json',
    'mse_report': 'mse_report.csv',
}

# Config keys accepted per command (anything else is rejected)
COMMON_KEYS = ['command', 'seed', 'threads', 'out']
SE_KEYS = ['p_se', 'mc_reps', 'fp_tol', 'max_fp_iter']
COMMAND_KEYS = {
    'prox': ['input', 'theta'],
    'solve': ['n', 'p', 'prior', 'sigma_w', 'lambda', 'design', 'response',
              'max_iter', 'opt_tol', 'tau_schedule', 'reference'] + SE_KEYS,
    'se': ['alpha', 'prior', 'sigma_w', 'delta', 'tau0_sq'] + SE_KEYS,
    'calibrate': ['lambda', 'prior', 'sigma_w', 'delta'] + SE_KEYS,
    'bench': ['n', 'p', 'prior', 'sigma_w', 'lambda', 'thresholds',
              'target', 'amp_max_iter', 'fista_max_iter', 'ista_max_iter'] + SE_KEYS,
    'mse': ['n', 'p', 'prior', 'sigma_w', 'lambda', 'n_seeds'] + SE_KEYS,
}

# CLI messages
CLI_MESSAGES = {
    'start': "Running '{command}' (seed={seed}, threads={threads}) -> {out}",
    'done': "'{command}' finished, outputs written to {out}",
    'config_error': "Configuration error: {error}",
    'numeric_failure': "Numeric failure: {error}",
    'non_convergence': "Did not converge: {error}",
    'calibration_error': "Calibration failed: {error}",
    'unexpected': "Unexpected error: {error}",
    'written': "Wrote {path}",
}

"""
SLOPE cost and proximal-gradient reference solvers (ISTA / FISTA)
"""

import logging
from typing import Callable, Optional

import numpy as np

from config import (
    BASELINE_OPT_TOL,
    DEFAULT_SEED,
    FISTA_MAX_ITER,
    ISTA_MAX_ITER,
    POWER_ITER_MAX_ITER,
    POWER_ITER_TOL,
    REFERENCE_KKT_TOL,
    REFERENCE_MAX_ITER,
    REFERENCE_OPT_TOL,
    REFERENCE_POLISH_ITER,
    STEP_MARGIN,
)
from models.lambda_seq import as_array
from models.reports import SolverTrace
from services.metrics import TraceMonitor
from services.sorted_l1 import prox_sorted_l1, sorted_l1_norm, subgradient_distance
from utils.errors import ConfigError, DimensionError, NonConvergence, NumericFailure
from utils.rng import stream

logger = logging.getLogger(__name__)


def check_problem(X: np.ndarray, y: np.ndarray, lam=None):
    """
    Validate shapes of a regression problem

    Args:
        X: Design (n x p)
        y: Response (n)
        lam: Optional weights (p)

    Returns:
        Tuple (X, y, lam) as float arrays (lam None when not given)
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if X.ndim != 2:
        raise DimensionError(f"Design must be a matrix, got {X.ndim} dimensions")
    n, p = X.shape
    if y.size != n:
        raise DimensionError(f"Response has {y.size} entries, design has {n} rows")
    if lam is not None:
        lam = as_array(lam).ravel()
        if lam.size != p:
            raise DimensionError(f"Weights have {lam.size} entries, design has {p} columns")
    return X, y, lam


def slope_cost(b: np.ndarray, X: np.ndarray, y: np.ndarray, lam) -> float:
    """
    SLOPE objective 1/2 ||y - X b||^2 + J_lambda(b)

    Args:
        b: Coefficients
        X: Design
        y: Response
        lam: Non-increasing weights

    Returns:
        Cost value
    """
    X, y, lam = check_problem(X, y, lam)
    b = np.asarray(b, dtype=float).ravel()
    if b.size != X.shape[1]:
        raise DimensionError(f"Coefficients have {b.size} entries, design has {X.shape[1]} columns")
    r = y - X @ b
    return float(0.5 * (r @ r) + sorted_l1_norm(b, lam))


def power_iteration_sigma_max(
    X: np.ndarray,
    tol: float = POWER_ITER_TOL,
    max_iter: int = POWER_ITER_MAX_ITER,
    seed: int = DEFAULT_SEED
) -> float:
    """
    Largest singular value of X by power iteration on X^T X

    Args:
        X: Matrix
        tol: Relative change of the estimate that counts as converged
        max_iter: Iteration cap
        seed: Seed of the random start vector

    Returns:
        sigma_max(X)
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise DimensionError(f"Expected a matrix, got {X.ndim} dimensions")
    if not np.any(X):
        raise ConfigError("Power iteration needs a nonzero matrix")

    rng = stream(seed, 'power')
    v = rng.standard_normal(X.shape[1])
    v /= np.linalg.norm(v)

    sigma_sq = 0.0
    for k in range(1, max_iter + 1):
        Xv = X @ v
        # Rayleigh quotient of X^T X at the unit vector v
        estimate = float(Xv @ Xv)
        w = X.T @ Xv
        norm_w = np.linalg.norm(w)
        if norm_w == 0:
            v = rng.standard_normal(X.shape[1])
            v /= np.linalg.norm(v)
            continue
        v = w / norm_w
        if abs(estimate - sigma_sq) <= tol * estimate:
            logger.debug(f"Power iteration converged after {k} iterations")
            return float(np.sqrt(estimate))
        sigma_sq = estimate

    raise NonConvergence("Power iteration did not reach the requested tolerance", max_iter,
                         result=float(np.sqrt(sigma_sq)))


def default_step(X: np.ndarray) -> float:
    """Step 1/L with L = sigma_max(X)^2, inflated slightly so it stays a majorizer"""
    sigma = power_iteration_sigma_max(X)
    return 1.0 / (sigma ** 2 * (1.0 + STEP_MARGIN))


def _proximal_gradient(
    name: str,
    accelerated: bool,
    X: np.ndarray,
    y: np.ndarray,
    lam,
    max_iter: int,
    opt_tol: float,
    beta0: Optional[np.ndarray],
    beta_ref: Optional[np.ndarray],
    step: Optional[float],
    record: bool,
    stop_when: Optional[Callable[[dict], bool]]
) -> SolverTrace:
    X, y, lam = check_problem(X, y, lam)
    if lam is None:
        raise ConfigError("Weights are required")
    p = X.shape[1]
    if step is None:
        step = default_step(X)
    thresholds = step * lam

    beta = np.zeros(p) if beta0 is None else np.asarray(beta0, dtype=float).ravel().copy()
    extrapolated = beta.copy()
    t_k = 1.0

    trace = SolverTrace(name)
    monitor = TraceMonitor(beta_ref, cost_fn=lambda b: slope_cost(b, X, y, lam)) if record else None
    if record:
        trace.add(iter=0, step_diff=np.nan, **monitor(beta))

    for k in range(1, max_iter + 1):
        point = extrapolated if accelerated else beta
        grad = X.T @ (X @ point - y)
        beta_new = prox_sorted_l1(point - step * grad, thresholds)
        if not np.all(np.isfinite(beta_new)):
            raise NumericFailure(k, 'beta', solver=name)

        diff = beta_new - beta
        step_diff = float(diff @ diff / p)
        if accelerated:
            t_next = (1.0 + np.sqrt(1.0 + 4.0 * t_k ** 2)) / 2.0
            extrapolated = beta_new + ((t_k - 1.0) / t_next) * diff
            t_k = t_next
        beta = beta_new
        trace.iterations = k

        if record:
            row = dict(iter=k, step_diff=step_diff, **monitor(beta))
            trace.add(**row)
            if stop_when is not None and stop_when(row):
                break
        if step_diff <= opt_tol:
            trace.converged = True
            break

    trace.beta = beta
    logger.info(f"{name.upper()} stopped after {trace.iterations} iterations (converged={trace.converged})")
    return trace


def ista_run(
    X: np.ndarray,
    y: np.ndarray,
    lam,
    max_iter: int = ISTA_MAX_ITER,
    opt_tol: float = BASELINE_OPT_TOL,
    beta0: Optional[np.ndarray] = None,
    beta_ref: Optional[np.ndarray] = None,
    step: Optional[float] = None,
    record: bool = True,
    stop_when: Optional[Callable[[dict], bool]] = None
) -> SolverTrace:
    """
    ISTA: b+ = prox(b - s X^T(Xb - y); s lambda) with s = 1/sigma_max(X)^2

    Args:
        X: Design
        y: Response
        lam: SLOPE weights
        max_iter: Iteration cap
        opt_tol: Stop once ||b+ - b||^2 / p <= opt_tol
        beta0: Starting point (default zero)
        beta_ref: Reference solution for opt_error / set_diff records
        step: Step size (default from power iteration)
        record: Keep per-iteration records
        stop_when: Optional predicate on the latest record that ends the run early

    Returns:
        SolverTrace with cost, step difference and reference metrics per iteration
    """
    return _proximal_gradient('ista', False, X, y, lam, max_iter, opt_tol, beta0, beta_ref,
                              step, record, stop_when)


def fista_run(
    X: np.ndarray,
    y: np.ndarray,
    lam,
    max_iter: int = FISTA_MAX_ITER,
    opt_tol: float = BASELINE_OPT_TOL,
    beta0: Optional[np.ndarray] = None,
    beta_ref: Optional[np.ndarray] = None,
    step: Optional[float] = None,
    record: bool = True,
    stop_when: Optional[Callable[[dict], bool]] = None
) -> SolverTrace:
    """FISTA without restarts; same arguments as ista_run"""
    return _proximal_gradient('fista', True, X, y, lam, max_iter, opt_tol, beta0, beta_ref,
                              step, record, stop_when)


def reference_solution(
    X: np.ndarray,
    y: np.ndarray,
    lam,
    opt_tol: float = REFERENCE_OPT_TOL,
    max_iter: int = REFERENCE_MAX_ITER,
    step: Optional[float] = None,
    beta0: Optional[np.ndarray] = None,
    kkt_tol: float = REFERENCE_KKT_TOL,
    polish_iter: int = REFERENCE_POLISH_ITER
) -> np.ndarray:
    """
    Surrogate for the exact SLOPE minimizer: hyper-converged FISTA, then ISTA steps until
    X^T(y - X b) lies within kkt_tol of the subdifferential of J_lambda at b

    Args:
        X: Design
        y: Response
        lam: SLOPE weights
        opt_tol: FISTA step-difference tolerance
        max_iter: FISTA iteration cap
        step: Step size (default from power iteration)
        beta0: Starting point (default zero)
        kkt_tol: Untoleranced subgradient distance the polished solution must reach
        polish_iter: Cap on the ISTA polishing steps

    Returns:
        beta_hat
    """
    X, y, lam = check_problem(X, y, lam)
    if step is None:
        step = default_step(X)
    trace = fista_run(X, y, lam, max_iter=max_iter, opt_tol=opt_tol, beta0=beta0,
                      step=step, record=False)
    if not trace.converged:
        logger.warning(f"Reference FISTA hit max_iter={max_iter} before opt_tol={opt_tol:g}")

    beta = trace.beta
    thresholds = step * lam
    distance = np.inf
    for k in range(1, polish_iter + 1):
        beta = prox_sorted_l1(beta - step * (X.T @ (X @ beta - y)), thresholds)
        distance = subgradient_distance(beta, X.T @ (y - X @ beta), lam, tol=0.0)
        if distance <= kkt_tol:
            logger.debug(f"Reference polished in {k} ISTA steps (kkt={distance:.3g})")
            return beta
    logger.warning(f"Reference KKT distance {distance:.3g} above {kkt_tol:g} after {polish_iter} ISTA steps")
    return beta

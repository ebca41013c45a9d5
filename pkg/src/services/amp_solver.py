"""
Approximate message passing for SLOPE

beta^{t+1} = prox(X^T z^t + beta^t; alpha tau_t)
z^{t+1}    = y - X beta^{t+1} + (z^t / n) ||beta^{t+1}||_0*
"""

import logging
from typing import Callable, Optional, Tuple

import numpy as np

from models.amp_state import AmpConfig, AmpState
from models.lambda_seq import as_array
from models.reports import SolverTrace
from services.baselines import check_problem, slope_cost
from services.metrics import TraceMonitor
from services.sorted_l1 import (
    divergence_unique_nonzeros,
    prox_divergence,
    prox_sorted_l1,
)
from utils.errors import DimensionError, NumericFailure

logger = logging.getLogger(__name__)

ONSAGER_MODES = ('unique', 'jacobian')


def amp_init(y: np.ndarray, p: int) -> AmpState:
    """
    Initial AMP state beta^0 = 0, z^0 = y

    Args:
        y: Response vector
        p: Number of coefficients

    Returns:
        AmpState at iteration 0
    """
    y = np.asarray(y, dtype=float).ravel()
    if y.size == 0:
        raise DimensionError("Response vector is empty")
    if int(p) < 1:
        raise DimensionError(f"Number of coefficients must be >= 1, got {p}")
    return AmpState(np.zeros(int(p)), y.copy(), 0)


def amp_step(
    state: AmpState,
    X: np.ndarray,
    y: np.ndarray,
    alpha,
    tau: Optional[float] = None,
    onsager: str = 'unique'
) -> AmpState:
    """
    One AMP iteration

    Args:
        state: Current iterate
        X: Design (n x p)
        y: Response
        alpha: Threshold direction; thresholds are alpha * tau
        tau: Noise level override (default: the state's tau_hat)
        onsager: 'unique' uses ||beta+||_0*, 'jacobian' sums the prox Jacobian diagonal

    Returns:
        Next AmpState
    """
    X, y, alpha = check_problem(X, y, alpha)
    n, p = X.shape
    if state.z.size != n:
        raise DimensionError(f"Residual has {state.z.size} entries, design has {n} rows")
    beta = state.beta
    if beta.size != p:
        raise DimensionError(f"Estimate has {beta.size} entries, design has {p} columns")
    if onsager not in ONSAGER_MODES:
        raise ValueError(f"Unknown Onsager mode '{onsager}'")

    tau = state.tau_hat if tau is None else float(tau)
    if not np.isfinite(tau):
        raise NumericFailure(state.iter, 'tau_hat')
    theta = alpha * tau

    pseudo_data = X.T @ state.z + beta
    beta_new = prox_sorted_l1(pseudo_data, theta)
    if not np.all(np.isfinite(beta_new)):
        raise NumericFailure(state.iter + 1, 'beta')

    if onsager == 'unique':
        divergence = float(divergence_unique_nonzeros(beta_new))
    else:
        divergence = prox_divergence(pseudo_data, theta)
    z_new = y - X @ beta_new + (state.z / n) * divergence
    if not np.all(np.isfinite(z_new)):
        raise NumericFailure(state.iter + 1, 'z')

    return AmpState(beta_new, z_new, state.iter + 1)


def amp_run(
    X: np.ndarray,
    y: np.ndarray,
    alpha,
    cfg: AmpConfig,
    beta_ref: Optional[np.ndarray] = None,
    lam=None,
    stop_when: Optional[Callable[[dict], bool]] = None
) -> Tuple[AmpState, SolverTrace]:
    """
    Iterate AMP until ||beta^{t+1} - beta^t||^2 / p <= opt_tol or max_iter

    Args:
        X: Design
        y: Response
        alpha: Threshold direction
        cfg: AmpConfig (stopping rule, optional tau schedule)
        beta_ref: Reference solution; adds opt_error / set_diff to the trace
        lam: SLOPE weights; adds cost and kkt residual to the trace
        stop_when: Optional predicate on the latest record that ends the run early

    Returns:
        Tuple (final state, trace)
    """
    X, y, alpha = check_problem(X, y, alpha)
    p = X.shape[1]
    lam = None if lam is None else as_array(lam)
    cost_fn = None if lam is None else (lambda b: slope_cost(b, X, y, lam))
    monitor = TraceMonitor(beta_ref, cost_fn)

    state = amp_init(y, p)
    trace = SolverTrace('amp')
    if cfg.record_trajectory:
        trace.add(iter=0, tau_hat=state.tau_hat, n_unique=0, step_diff=np.nan, **monitor(state.beta))

    for t in range(cfg.max_iter):
        tau = cfg.tau_at(t)
        new_state = amp_step(state, X, y, alpha, tau=tau)
        diff = new_state.beta - state.beta
        step_diff = float(diff @ diff / p)
        trace.iterations = new_state.iter

        if cfg.record_trajectory:
            row = dict(
                iter=new_state.iter,
                tau_hat=new_state.tau_hat,
                n_unique=divergence_unique_nonzeros(new_state.beta),
                step_diff=step_diff,
                **monitor(new_state.beta)
            )
            if lam is not None:
                row['kkt'] = kkt_residual(new_state, state, X, y, lam, alpha, tau_prev=tau)
            trace.add(**row)
            logger.debug(f"AMP t={new_state.iter} tau_hat={new_state.tau_hat:.6g} step_diff={step_diff:.3g}")
        state = new_state

        if step_diff <= cfg.opt_tol:
            trace.converged = True
            break
        if cfg.record_trajectory and stop_when is not None and stop_when(trace.records[-1]):
            break

    trace.beta = state.beta
    logger.info(f"AMP stopped after {state.iter} iterations (converged={trace.converged})")
    return state, trace


def kkt_subgradient(
    s_t: AmpState,
    s_prev: AmpState,
    X: np.ndarray,
    lam,
    alpha,
    tau_prev: Optional[float] = None
) -> Tuple[np.ndarray, float, np.ndarray]:
    """
    Subgradient candidate nu^t = mu_t (X^T z^{t-1} + beta^{t-1} - beta^t)

    Args:
        s_t: Iterate t
        s_prev: Iterate t-1
        X: Design
        lam: SLOPE weights
        alpha: Threshold direction used by the run
        tau_prev: Noise level used at step t-1 (default: s_prev.tau_hat)

    Returns:
        Tuple (nu, mu, theta_prev) with mu = <lambda, theta> / ||theta||^2
    """
    if s_t.iter != s_prev.iter + 1:
        raise ValueError(f"Iterates must be consecutive, got {s_prev.iter} and {s_t.iter}")
    lam = as_array(lam).ravel()
    alpha = as_array(alpha).ravel()
    tau = s_prev.tau_hat if tau_prev is None else float(tau_prev)
    theta = alpha * tau
    theta_sq = float(theta @ theta)
    mu = float(lam @ theta) / theta_sq if theta_sq > 0 else 0.0
    nu = mu * (X.T @ s_prev.z + s_prev.beta - s_t.beta)
    return nu, mu, theta


def kkt_residual(
    s_t: AmpState,
    s_prev: AmpState,
    X: np.ndarray,
    y: np.ndarray,
    lam,
    alpha,
    tau_prev: Optional[float] = None
) -> float:
    """
    Stationarity residual ||nu^t - X^T(y - X beta^t)|| / sqrt(p) of the SLOPE cost

    Args:
        s_t: Iterate t
        s_prev: Iterate t-1
        X: Design
        y: Response
        lam: SLOPE weights
        alpha: Threshold direction used by the run
        tau_prev: Noise level used at step t-1 (default: s_prev.tau_hat)

    Returns:
        Residual (0 at a SLOPE minimizer with calibrated thresholds)
    """
    X, y, _ = check_problem(X, y)
    nu, _, _ = kkt_subgradient(s_t, s_prev, X, lam, alpha, tau_prev)
    gap = nu - X.T @ (y - X @ s_t.beta)
    return float(np.linalg.norm(gap) / np.sqrt(s_t.beta.size))


def effective_lambda(state: AmpState, alpha) -> np.ndarray:
    """
    Weights for which an AMP fixed point is exactly a SLOPE minimizer

    At a fixed point z (1 - ||beta||_0*/n) = y - X beta and X^T z is a subgradient of
    J_{alpha tau_hat} at beta, so beta minimizes the SLOPE cost with
    lambda = (1 - ||beta||_0*/n) tau_hat alpha.

    Args:
        state: (Converged) AMP iterate
        alpha: Threshold direction used by the run

    Returns:
        Weight vector parallel to alpha
    """
    alpha = as_array(alpha).ravel()
    omega = divergence_unique_nonzeros(state.beta) / state.n
    return (1.0 - omega) * state.tau_hat * alpha

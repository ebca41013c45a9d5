"""
Experiments: seeded problem instances, the AMP / FISTA / ISTA convergence
benchmark, the MSE prediction check and residual tracking against state evolution
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from config import (
    AMP_MAX_ITER,
    BENCH_THRESHOLDS,
    DEFAULT_SEED,
    FISTA_MAX_ITER,
    ISTA_MAX_ITER,
    MSE_N_SEEDS,
    REFERENCE_TARGET,
    REFERENCE_TARGETS,
    SE_TRACKING_ITERS,
)
from models.amp_state import AmpConfig
from models.calibration import CalibrationResult
from models.instance import ProblemInstance
from models.lambda_seq import LambdaSeq, as_array
from models.prior import PriorSpec
from models.reports import BenchReport, MseReport
from models.se import SeConfig
from services.amp_solver import amp_run, effective_lambda
from services.baselines import default_step, fista_run, ista_run, reference_solution
from services.calibration import Calibrator
from services.metrics import opt_error, support_set_diff
from services.state_evolution import StateEvolution, mean_stderr
from utils.errors import CalibrationError, ConfigError, DimensionError
from utils.rng import stream

logger = logging.getLogger(__name__)

__all__ = [
    'gen_instance',
    'opt_error',
    'support_set_diff',
    'instance_se_config',
    'calibrate_instance',
    'target_lambda',
    'run_convergence_bench',
    'mse_experiment',
    'se_tracking',
]


def gen_instance(
    n: int,
    p: int,
    prior: PriorSpec,
    sigma_w: float = 0.0,
    seed: int = DEFAULT_SEED
) -> ProblemInstance:
    """
    Draw y = X beta + w with X_ij ~ N(0, 1/n), beta_i ~ prior, w_i ~ N(0, sigma_w^2)

    Args:
        n: Number of measurements
        p: Number of coefficients
        prior: Signal prior
        sigma_w: Noise standard deviation
        seed: Base seed; design, signal and noise use separate streams

    Returns:
        ProblemInstance
    """
    if int(n) < 1 or int(p) < 1:
        raise DimensionError(f"n and p must be >= 1, got n={n}, p={p}")
    if sigma_w < 0:
        raise ConfigError(f"sigma_w must be >= 0, got {sigma_w}")
    n, p = int(n), int(p)

    X = stream(seed, 'design').standard_normal((n, p)) / np.sqrt(n)
    beta = prior.sample(stream(seed, 'signal'), p)
    if sigma_w > 0:
        w = sigma_w * stream(seed, 'noise').standard_normal(n)
    else:
        w = np.zeros(n)
    y = X @ beta + w
    return ProblemInstance(X, y, beta_true=beta, w=w, prior=prior, sigma_w=sigma_w, seed=seed)


def instance_se_config(instance: ProblemInstance, se_cfg: Optional[SeConfig] = None) -> SeConfig:
    """SeConfig matching the instance's delta, sigma_w and p"""
    data = se_cfg.to_dict() if se_cfg is not None else {}
    data.update(p_se=instance.p, delta=instance.delta, sigma_w=instance.sigma_w)
    if instance.seed is not None and se_cfg is None:
        data['seed'] = instance.seed
    return SeConfig.from_dict(data)


def calibrate_instance(
    instance: ProblemInstance,
    lam,
    se_cfg: Optional[SeConfig] = None
) -> CalibrationResult:
    """Calibrated alpha for the instance's prior and dimensions"""
    if instance.prior is None:
        raise ConfigError("Calibration needs the signal prior of the instance")
    cfg = instance_se_config(instance, se_cfg)
    return Calibrator(instance.prior, cfg).alpha_of_lambda(lam)


def target_lambda(
    instance: ProblemInstance,
    lam,
    alpha,
    target: str = REFERENCE_TARGET,
    amp_max_iter: int = AMP_MAX_ITER
) -> np.ndarray:
    """
    Weights whose SLOPE minimizer serves as the reference solution

    Args:
        instance: Problem instance
        lam: Requested SLOPE weights
        alpha: Calibrated threshold direction
        target: 'nominal' keeps lam, 'effective' uses the weights solved by the AMP fixed point
        amp_max_iter: Iteration cap of the AMP run behind 'effective'

    Returns:
        Weight vector
    """
    if target not in REFERENCE_TARGETS:
        raise ConfigError(f"Unknown reference target '{target}'")
    lam = as_array(lam).ravel()
    if target == 'nominal':
        return lam

    state, trace = amp_run(instance.X, instance.y, alpha,
                           AmpConfig(alpha, max_iter=amp_max_iter, record_trajectory=False))
    if not trace.converged:
        logger.warning(f"AMP did not converge in {amp_max_iter} iterations; effective weights are approximate")
    lam_eff = effective_lambda(state, alpha)
    if lam_eff.min() <= 0:
        raise CalibrationError("AMP fixed point has no positive effective weights")
    logger.info(f"Effective weights are {lam_eff[0] / lam[0]:.6f} x the requested ones")
    return lam_eff


def run_convergence_bench(
    instance: ProblemInstance,
    lam,
    thresholds: Sequence[float] = BENCH_THRESHOLDS,
    se_cfg: Optional[SeConfig] = None,
    calibration: Optional[CalibrationResult] = None,
    target: str = REFERENCE_TARGET,
    amp_max_iter: int = AMP_MAX_ITER,
    fista_max_iter: int = FISTA_MAX_ITER,
    ista_max_iter: int = ISTA_MAX_ITER
) -> BenchReport:
    """
    Iterations AMP, FISTA and ISTA need to reach each optimization-error threshold

    Args:
        instance: Problem instance (its prior drives the calibration)
        lam: SLOPE weights
        thresholds: Optimization-error thresholds
        se_cfg: Monte-Carlo settings for the calibration
        calibration: Precomputed calibration (skips alpha_of_lambda)
        target: Reference weights, see target_lambda
        amp_max_iter: AMP iteration cap
        fista_max_iter: FISTA iteration cap
        ista_max_iter: ISTA iteration cap

    Returns:
        BenchReport with per-solver traces
    """
    thresholds = sorted((float(t) for t in thresholds), reverse=True)
    if not thresholds or thresholds[-1] <= 0:
        raise ConfigError("thresholds must be a non-empty list of positive values")
    lam = LambdaSeq(lam) if not isinstance(lam, LambdaSeq) else lam
    if len(lam) != instance.p:
        raise DimensionError(f"lambda has {len(lam)} entries, instance has p={instance.p}")

    if calibration is None:
        calibration = calibrate_instance(instance, lam, se_cfg)
    alpha = calibration.alpha
    lam_target = target_lambda(instance, lam, alpha, target, amp_max_iter)

    X, y = instance.X, instance.y
    step = default_step(X)
    beta_ref = reference_solution(X, y, lam_target, step=step)
    tightest = thresholds[-1]

    def stop_when(record: dict) -> bool:
        return record.get('opt_error', np.inf) <= tightest and record.get('set_diff') == 0

    _, amp_trace = amp_run(X, y, alpha, AmpConfig(alpha, max_iter=amp_max_iter),
                           beta_ref=beta_ref, lam=lam_target, stop_when=stop_when)
    fista_trace = fista_run(X, y, lam_target, max_iter=fista_max_iter, beta_ref=beta_ref,
                            step=step, stop_when=stop_when)
    ista_trace = ista_run(X, y, lam_target, max_iter=ista_max_iter, beta_ref=beta_ref,
                          step=step, stop_when=stop_when)

    meta = {
        'target': target,
        'seed': instance.seed,
        'alpha_max': alpha.max,
        'lambda_scale': calibration.scale,
        'tau_star_sq': calibration.tau_star_sq,
        'target_ratio': float(lam_target[0] / lam.max)
    }
    report = BenchReport.from_traces(
        {'amp': amp_trace, 'fista': fista_trace, 'ista': ista_trace}, thresholds, meta
    )
    logger.info(f"Benchmark finished: {report}")
    return report


def mse_experiment(
    n: int,
    p: int,
    prior: PriorSpec,
    sigma_w: float,
    lam,
    n_seeds: int = MSE_N_SEEDS,
    seed: int = DEFAULT_SEED,
    se_cfg: Optional[SeConfig] = None,
    workers: Optional[int] = None
) -> MseReport:
    """
    Empirical ||beta_hat - beta||^2 / p over seeds against delta (tau*^2 - sigma_w^2)

    Args:
        n: Number of measurements
        p: Number of coefficients
        prior: Signal prior
        sigma_w: Noise standard deviation
        lam: SLOPE weights
        n_seeds: Number of independent instances (seeds seed, seed+1, ...)
        seed: First seed
        se_cfg: Monte-Carlo settings for the prediction
        workers: Worker cap for the per-seed solves

    Returns:
        MseReport (stderr is 0 with a single seed)
    """
    if int(n_seeds) < 1:
        raise ConfigError(f"n_seeds must be >= 1, got {n_seeds}")
    lam = LambdaSeq(lam) if not isinstance(lam, LambdaSeq) else lam
    if len(lam) != int(p):
        raise DimensionError(f"lambda has {len(lam)} entries, p={p}")

    data = se_cfg.to_dict() if se_cfg is not None else {'seed': seed}
    data.update(p_se=int(p), delta=int(n) / int(p), sigma_w=sigma_w)
    cfg = SeConfig.from_dict(data)
    calibration = Calibrator(prior, cfg).alpha_of_lambda(lam)
    predicted = StateEvolution(prior, cfg).predicted_mse(calibration.tau_star_sq)

    def one_seed(index: int) -> float:
        instance = gen_instance(n, p, prior, sigma_w, seed + index)
        beta_hat = reference_solution(instance.X, instance.y, lam)
        return opt_error(beta_hat, instance.beta_true)

    seeds = range(int(n_seeds))
    if workers == 1:
        per_seed = [one_seed(i) for i in seeds]
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            per_seed = list(executor.map(one_seed, seeds))

    empirical, stderr = mean_stderr(np.array(per_seed))
    report = MseReport(n, p, sigma_w, empirical, stderr, predicted,
                       per_seed=per_seed, tau_star_sq=calibration.tau_star_sq)
    logger.info(f"MSE experiment: {report}")
    return report


def se_tracking(
    instance: ProblemInstance,
    alpha,
    se_cfg: Optional[SeConfig] = None,
    n_iter: int = SE_TRACKING_ITERS
) -> Tuple[pd.DataFrame, float]:
    """
    Compare ||z^t||^2 / n of an AMP run with the state evolution tau_t^2

    Args:
        instance: Problem instance (prior needed for the state evolution)
        alpha: Threshold direction
        se_cfg: Monte-Carlo settings
        n_iter: Number of AMP iterations to compare

    Returns:
        Tuple (frame with columns iter, residual_sq, tau_sq, rel_error; worst relative error)
    """
    if instance.prior is None:
        raise ConfigError("Tracking needs the signal prior of the instance")
    cfg = instance_se_config(instance, se_cfg)
    fixed = StateEvolution(instance.prior, cfg).fixed_point(alpha)
    trajectory = fixed.tau_sq_trajectory

    _, trace = amp_run(instance.X, instance.y, alpha,
                       AmpConfig(alpha, max_iter=n_iter, opt_tol=np.finfo(float).tiny))
    rows = []
    for record in trace.records[:n_iter + 1]:
        t = int(record['iter'])
        tau_sq = trajectory[min(t, len(trajectory) - 1)]
        residual_sq = record['tau_hat'] ** 2
        rows.append({
            'iter': t,
            'residual_sq': residual_sq,
            'tau_sq': tau_sq,
            'rel_error': abs(residual_sq - tau_sq) / tau_sq if tau_sq > 0 else abs(residual_sq)
        })
    frame = pd.DataFrame(rows, columns=['iter', 'residual_sq', 'tau_sq', 'rel_error'])
    return frame, float(frame['rel_error'].max())

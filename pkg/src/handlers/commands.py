"""
Command handlers: one function per CLI command

Each handler takes a validated RunConfig, writes its outputs under cfg.out and
returns the list of files written.
"""

import logging
import os
from typing import Callable, Dict, List, Tuple

import numpy as np
import pandas as pd

from config import OUTPUT_FILES, SE_TRAJECTORY_COLUMNS
from models.amp_state import AmpConfig
from models.instance import ProblemInstance
from models.lambda_seq import LambdaSeq
from models.prior import PriorSpec
from models.run_config import RunConfig, build_sequence
from models.se import SeConfig
from services.amp_solver import amp_run, effective_lambda
from services.baselines import reference_solution, slope_cost
from services.calibration import Calibrator
from services.experiments import gen_instance, mse_experiment, run_convergence_bench, target_lambda
from services.sorted_l1 import divergence_unique_nonzeros, prox_sorted_l1, subgradient_distance
from services.state_evolution import StateEvolution
from utils.errors import ConfigError
from utils.helpers import (
    ensure_dir,
    read_matrix,
    read_vector,
    write_frame,
    write_json,
    write_vector,
)

logger = logging.getLogger(__name__)


def _out(cfg: RunConfig, key: str) -> str:
    return os.path.join(ensure_dir(cfg.out), OUTPUT_FILES[key])


def _instance(cfg: RunConfig) -> ProblemInstance:
    prior = cfg.prior()
    sigma_w = cfg.get('sigma_w', 0.0)
    if cfg.get('design') is not None:
        if cfg.get('response') is None:
            raise ConfigError("'design' needs a matching 'response' file")
        X = read_matrix(cfg.path(cfg.get('design')))
        y = read_vector(cfg.path(cfg.get('response')))
        return ProblemInstance(X, y, prior=prior, sigma_w=sigma_w, seed=cfg.seed)
    return gen_instance(cfg.get('n'), cfg.get('p'), prior, sigma_w, cfg.seed)


def cmd_prox(cfg: RunConfig) -> List[str]:
    """prox_{J_theta}(input) with the divergence count on the header line"""
    v = read_vector(cfg.path(cfg.get('input')))
    theta = cfg.sequence('theta', v.size, penalty=False)
    out = prox_sorted_l1(v, theta)
    k = divergence_unique_nonzeros(out)
    return [write_vector(_out(cfg, 'prox'), out, header=f"divergence={k}")]


def cmd_solve(cfg: RunConfig) -> List[str]:
    """Calibrate alpha for lambda, then run AMP on the configured instance"""
    instance = _instance(cfg)
    lam = cfg.sequence('lambda', instance.p)
    se_cfg = cfg.se_config(p_se=instance.p, delta=instance.delta, sigma_w=instance.sigma_w)
    calibration = Calibrator(instance.prior, se_cfg).alpha_of_lambda(lam)
    alpha = calibration.alpha

    schedule = cfg.get('tau_schedule')
    if schedule == 'se':
        fixed = StateEvolution(instance.prior, se_cfg).fixed_point(alpha)
        schedule = np.sqrt(fixed.tau_sq_trajectory)

    beta_ref = None
    target = cfg.get('reference')
    if target:
        lam_target = target_lambda(instance, lam, alpha, target, cfg.get('max_iter'))
        beta_ref = reference_solution(instance.X, instance.y, lam_target)

    amp_cfg = AmpConfig(alpha, max_iter=cfg.get('max_iter'), opt_tol=cfg.get('opt_tol'),
                        tau_schedule=schedule)
    state, trace = amp_run(instance.X, instance.y, alpha, amp_cfg, beta_ref=beta_ref, lam=lam)

    X, y, beta = instance.X, instance.y, state.beta
    last = trace.records[-1] if trace.records else {}
    summary = {
        'iterations': trace.iterations,
        'converged': trace.converged,
        'kkt_residual': last.get('kkt'),
        'kkt_distance_effective': subgradient_distance(beta, X.T @ (y - X @ beta),
                                                       effective_lambda(state, alpha)),
        'cost': slope_cost(beta, X, y, lam),
        'tau_hat': state.tau_hat,
        'opt_error': last.get('opt_error'),
        'set_diff': last.get('set_diff'),
        'reference': target or None,
        'instance': instance.to_dict(),
        'calibration': calibration.to_dict()
    }
    if instance.beta_true is not None:
        diff = beta - instance.beta_true
        summary['mse'] = float(diff @ diff / instance.p)

    return [
        write_vector(_out(cfg, 'solution'), beta),
        write_frame(_out(cfg, 'trace'), trace.to_frame()),
        write_json(_out(cfg, 'solve_summary'), summary),
    ]


def _se_alpha(cfg: RunConfig, se_cfg: SeConfig, prior: PriorSpec) -> Tuple[LambdaSeq, StateEvolution]:
    spec = cfg.get('alpha')
    if isinstance(spec, dict) and spec.get('kind') == 'amin_multiple':
        unknown = set(spec) - {'kind', 'direction', 'factor'}
        if unknown:
            raise ConfigError(f"Unknown keys for alpha kind 'amin_multiple': {', '.join(sorted(unknown))}")
        if 'direction' not in spec or 'factor' not in spec:
            raise ConfigError("alpha kind 'amin_multiple' needs 'direction' and 'factor'")
        se = StateEvolution(prior, se_cfg)
        direction = build_sequence(spec['direction'], se_cfg.p_se).normalized()
        scale = se.alpha_min_scale(direction)
        return direction.scaled(float(spec['factor']) * scale), se

    alpha = cfg.sequence('alpha', se_cfg.p_se, penalty=False)
    if len(alpha) != se_cfg.p_se:
        se_cfg = se_cfg.with_p(len(alpha))
    return alpha, StateEvolution(prior, se_cfg)


def cmd_se(cfg: RunConfig) -> List[str]:
    """State evolution trajectory from tau0^2 to the fixed point"""
    prior = cfg.prior()
    alpha, se = _se_alpha(cfg, cfg.se_config(), prior)

    f_value, f_stderr = se.f_alpha(alpha)
    stein_value, stein_stderr = se.f_alpha_stein(alpha)
    if abs(f_value - stein_value) > 4.0 * (f_stderr + stein_stderr) + 1e-3:
        logger.warning(f"f(alpha) estimates disagree: {f_value:.6g} vs {stein_value:.6g} from ||prox||^2; "
                       f"raise mc_reps or p_se")
    result = se.fixed_point(alpha, cfg.get('tau0_sq'))
    trajectory = pd.DataFrame(
        {'iter': np.arange(len(result.tau_sq_trajectory)), 'tau_sq': result.tau_sq_trajectory},
        columns=SE_TRAJECTORY_COLUMNS
    )
    summary = dict(result.to_dict())
    summary.update(
        f_alpha=f_value,
        f_alpha_stderr=f_stderr,
        f_alpha_stein=stein_value,
        f_alpha_stein_stderr=stein_stderr,
        alpha_min_scale=se.alpha_min_scale(alpha) if alpha.max > 0 else None,
        alpha_max=alpha.max,
        predicted_mse=se.predicted_mse(result.tau_star_sq),
        se_config=se.cfg.to_dict(),
        prior=prior.to_dict()
    )
    return [
        write_frame(_out(cfg, 'se_trajectory'), trajectory),
        write_json(_out(cfg, 'se_summary'), summary),
    ]


def cmd_calibrate(cfg: RunConfig) -> List[str]:
    """alpha for the configured lambda"""
    prior = cfg.prior()
    lam = cfg.sequence('lambda', cfg.get('p_se'))
    se_cfg = cfg.se_config(p_se=len(lam))
    result = Calibrator(prior, se_cfg).alpha_of_lambda(lam)
    data = result.to_dict()
    data['lambda'] = lam.values.tolist()
    data['se_config'] = se_cfg.to_dict()
    return [write_json(_out(cfg, 'alpha'), data)]


def cmd_bench(cfg: RunConfig) -> List[str]:
    """AMP / FISTA / ISTA first-hit iterations on a generated instance"""
    instance = gen_instance(cfg.get('n'), cfg.get('p'), cfg.prior(), cfg.get('sigma_w', 0.0), cfg.seed)
    lam = cfg.sequence('lambda', instance.p)
    se_cfg = cfg.se_config(p_se=instance.p, delta=instance.delta, sigma_w=instance.sigma_w)
    report = run_convergence_bench(
        instance, lam,
        thresholds=cfg.get('thresholds'),
        se_cfg=se_cfg,
        target=cfg.get('target'),
        amp_max_iter=cfg.get('amp_max_iter'),
        fista_max_iter=cfg.get('fista_max_iter'),
        ista_max_iter=cfg.get('ista_max_iter')
    )
    if not report.is_monotone():
        logger.warning("First-hit iterations are not monotone in the threshold")
    logger.info(f"Benchmark target lambda_1 / requested lambda_1 = {report.meta['target_ratio']:.6g} "
                f"({report.meta['target']})")
    return [
        write_frame(_out(cfg, 'bench_report'), report.report_frame()),
        write_frame(_out(cfg, 'bench_trace'), report.trace_frame()),
        write_json(_out(cfg, 'bench_summary'), report.to_dict()),
    ]


def cmd_mse(cfg: RunConfig) -> List[str]:
    """Empirical SLOPE MSE over seeds against the state evolution prediction"""
    p = cfg.get('p')
    lam = cfg.sequence('lambda', p)
    se_cfg = cfg.se_config(p_se=p, delta=cfg.get('n') / p)
    report = mse_experiment(
        cfg.get('n'), p, cfg.prior(), cfg.get('sigma_w', 0.0), lam,
        n_seeds=cfg.get('n_seeds'),
        seed=cfg.seed,
        se_cfg=se_cfg,
        workers=cfg.threads
    )
    if report.single_seed:
        logger.warning("Single seed: stderr is reported as 0")
    return [write_frame(_out(cfg, 'mse_report'), report.to_frame())]


COMMANDS: Dict[str, Callable[[RunConfig], List[str]]] = {
    'prox': cmd_prox,
    'solve': cmd_solve,
    'se': cmd_se,
    'calibrate': cmd_calibrate,
    'bench': cmd_bench,
    'mse': cmd_mse,
}

"""
Calibration between SLOPE weights lambda and AMP threshold directions alpha

    lambda(alpha) = alpha tau* (1 - E||prox(B + tau* Z; alpha tau*)||_0* / n)

and its inverse by bracketing and bisection along the ray a * lambda / lambda_1.
"""

import logging
from typing import List, Optional, Tuple

import numpy as np

from config import CALIBRATION_MAX_DOUBLINGS, CALIBRATION_MIN_START, CALIBRATION_RTOL
from models.calibration import CalibrationResult
from models.lambda_seq import LambdaSeq, as_array
from models.prior import PriorSpec
from models.se import SeConfig
from services.state_evolution import StateEvolution
from utils.errors import (
    AlphaBelowAmin,
    ConfigError,
    NoBracket,
    NonConvergence,
    NonMonotoneSign,
)

logger = logging.getLogger(__name__)


class Calibrator:
    """Calibration for one (prior, SeConfig) pair; all evaluations share the same MC draws"""

    def __init__(self, prior: PriorSpec, cfg: SeConfig):
        self.prior = prior
        self.cfg = cfg
        self.se = StateEvolution(prior, cfg)

    def lambda_of_alpha(self, alpha, tau0_sq: Optional[float] = None) -> CalibrationResult:
        """
        Compute lambda(alpha) at the state evolution fixed point

        Args:
            alpha: Threshold direction of length p_se
            tau0_sq: Starting point of the fixed-point iteration

        Returns:
            CalibrationResult whose lambda_check is lambda(alpha) (entries may be negative
            close to A_min)
        """
        alpha = as_array(alpha).ravel()
        fixed = self.se.fixed_point(alpha, tau0_sq)
        tau = float(np.sqrt(fixed.tau_star_sq))
        count, count_err = self.se.unique_count(fixed.tau_star_sq, alpha)

        n = self.cfg.n_se
        factor = 1.0 - count / n
        scale = tau * factor

        # delta method: stderr of tau from stderr of tau^2
        tau_err = fixed.mc_stderr / (2.0 * tau) if tau > 0 else 0.0
        scale_err = float(np.hypot(factor * tau_err, tau * count_err / n))

        return CalibrationResult(
            alpha=LambdaSeq(alpha, penalty=False),
            scale=scale,
            tau_star_sq=fixed.tau_star_sq,
            lambda_check=alpha * scale,
            mc_stderr=scale_err,
            lambda_stderr=alpha * scale_err
        )

    @staticmethod
    def _sign(
        a: float,
        result: CalibrationResult,
        lam: np.ndarray,
        history: List[Tuple[float, float, float]]
    ) -> int:
        # lambda(a l) is parallel to lam, so its first entry carries the whole comparison;
        # the first entry must not decrease in a beyond the Monte-Carlo noise
        value = float(result.lambda_check[0])
        noise = 3.0 * float(result.lambda_stderr[0]) + 1e-12 * abs(float(lam[0]))
        for a_prev, value_prev, noise_prev in history:
            slack = noise + noise_prev
            if (a_prev < a and value_prev > value + slack) or (a_prev > a and value_prev < value - slack):
                raise NonMonotoneSign(
                    f"lambda_1(a l) = {value:.6g} at a={a:.6g} contradicts {value_prev:.6g} at "
                    f"a={a_prev:.6g}; increase mc_reps"
                )
        history.append((a, value, noise))
        return int(np.sign(value - lam[0]))

    def alpha_of_lambda(
        self,
        lam,
        rtol: float = CALIBRATION_RTOL,
        max_doublings: int = CALIBRATION_MAX_DOUBLINGS
    ) -> CalibrationResult:
        """
        Find alpha = a* lambda / lambda_1 with lambda(alpha) = lambda

        Args:
            lam: SLOPE weights (min > 0), length p_se
            rtol: Relative bisection tolerance on the scalar a
            max_doublings: Cap on the bracket doublings

        Returns:
            CalibrationResult at the bisection midpoint
        """
        lam_seq = lam if isinstance(lam, LambdaSeq) else LambdaSeq(lam)
        lam = lam_seq.values
        if lam.min() <= 0:
            raise ConfigError(f"min(lambda) must be > 0, got {lam.min():g}")
        if lam.size != self.cfg.p_se:
            raise ConfigError(f"lambda has {lam.size} entries, p_se is {self.cfg.p_se}")
        ell = lam / lam[0]

        warm = {'tau_sq': None}
        history: List[Tuple[float, float, float]] = []

        def evaluate(a: float) -> Tuple[int, Optional[CalibrationResult]]:
            try:
                result = self.lambda_of_alpha(a * ell, tau0_sq=warm['tau_sq'])
            except AlphaBelowAmin:
                return -1, None
            except NonConvergence as e:
                # the fixed point runs off towards tau = inf just above the A_min boundary
                logger.warning(f"Calibration at a={a:.6g} treated as below A_min: {e}")
                return -1, None
            warm['tau_sq'] = result.tau_star_sq
            return self._sign(a, result, lam, history), result

        a_lo = self.se.alpha_min_scale(ell)
        a_hi = 2.0 * a_lo if a_lo > 0 else CALIBRATION_MIN_START
        cap = max(a_lo, CALIBRATION_MIN_START) * 2.0 ** max_doublings

        sign, result = evaluate(a_hi)
        while sign < 0:
            a_lo, a_hi = a_hi, 2.0 * a_hi
            if a_hi > cap:
                raise NoBracket(f"lambda(a * l) stays below lambda up to a = {a_lo:.6g}")
            sign, result = evaluate(a_hi)
        logger.info(f"Calibration bracket [{a_lo:.6g}, {a_hi:.6g}]")

        a_mid = a_hi
        while sign != 0 and a_hi - a_lo > rtol * a_hi:
            a_mid = 0.5 * (a_lo + a_hi)
            sign, result = evaluate(a_mid)
            if sign < 0:
                a_lo = a_mid
            elif sign > 0:
                a_hi = a_mid

        if result is None:
            sign, result = evaluate(a_hi)
            a_mid = a_hi
        logger.info(f"Calibrated alpha scale a*={a_mid:.6g} (lambda scale {result.scale:.6g})")
        return result


def lambda_of_alpha(alpha, prior: PriorSpec, cfg: SeConfig) -> CalibrationResult:
    """lambda(alpha) with diagnostics, see Calibrator.lambda_of_alpha"""
    p = len(as_array(alpha).ravel())
    if cfg.p_se != p:
        cfg = cfg.with_p(p)
    return Calibrator(prior, cfg).lambda_of_alpha(alpha)


def alpha_of_lambda(lam, prior: PriorSpec, cfg: SeConfig) -> CalibrationResult:
    """
    Invert the calibration for SLOPE weights lam

    The Monte-Carlo dimension follows len(lam).
    """
    p = len(as_array(lam).ravel())
    if cfg.p_se != p:
        cfg = cfg.with_p(p)
    return Calibrator(prior, cfg).alpha_of_lambda(lam)

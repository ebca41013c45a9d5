"""
State evolution service

Monte-Carlo evaluation of the finite-p state evolution map
    F(tau^2) = sigma_w^2 + E||prox(B + tau Z; alpha tau) - B||^2 / (delta p),
its fixed point, the f(alpha) boundary function and the predicted MSE.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Tuple

import numpy as np

from config import AMIN_RTOL
from models.lambda_seq import as_array
from models.prior import PriorSpec
from models.se import SeConfig, SeResult
from services.sorted_l1 import (
    divergence_unique_nonzeros,
    magnitude_partition,
    prox_sorted_l1,
    rank_assigned,
)
from utils.errors import AlphaBelowAmin, ConfigError, DimensionError, NonConvergence
from utils.rng import stream

logger = logging.getLogger(__name__)

# f(a * direction) -> 0 as a grows, so this only guards against a broken direction
_AMIN_MAX_DOUBLINGS = 60


def mean_stderr(values: np.ndarray) -> Tuple[float, float]:
    """Mean and standard error over replicates (stderr 0 for a single replicate)"""
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        return float(values.mean()), 0.0
    return float(values.mean()), float(values.std(ddof=1) / np.sqrt(values.size))


class StateEvolution:
    """
    State evolution for one (prior, SeConfig) pair

    The (B, Z) draws of every replicate are made once and reused by every F
    evaluation, so the map tau^2 -> F(tau^2) is deterministic.
    """

    def __init__(self, prior: Optional[PriorSpec], cfg: SeConfig):
        cfg.validate()
        self.prior = prior
        self.cfg = cfg
        self._draws: Optional[List[Tuple[np.ndarray, np.ndarray]]] = None
        self._f_draws: Optional[List[np.ndarray]] = None

    def _map(self, fn: Callable[[int], object]) -> list:
        # results come back in replicate order whatever the worker count
        reps = range(self.cfg.mc_reps)
        if self.cfg.workers == 1:
            return [fn(r) for r in reps]
        with ThreadPoolExecutor(max_workers=self.cfg.workers) as executor:
            return list(executor.map(fn, reps))

    def _check_alpha(self, alpha) -> np.ndarray:
        alpha = as_array(alpha).ravel()
        if alpha.size != self.cfg.p_se:
            raise DimensionError(f"alpha has {alpha.size} entries, p_se is {self.cfg.p_se}")
        if np.any(alpha < 0) or not np.all(np.isfinite(alpha)):
            raise ConfigError("alpha must be finite and non-negative")
        return alpha

    def _replicate(self, r: int) -> Tuple[np.ndarray, np.ndarray]:
        rng = stream(self.cfg.seed, 'se', r)
        b = self.prior.sample(rng, self.cfg.p_se)
        z = rng.standard_normal(self.cfg.p_se)
        return b, z

    @property
    def draws(self) -> List[Tuple[np.ndarray, np.ndarray]]:
        """Per-replicate (B, Z) pairs shared by all F evaluations"""
        if self.prior is None:
            raise ConfigError("State evolution needs a signal prior")
        if self._draws is None:
            self._draws = self._map(self._replicate)
        return self._draws

    @property
    def tau0_sq(self) -> float:
        """Default starting point sigma_w^2 + E[B^2] / delta"""
        if self.prior is None:
            raise ConfigError("State evolution needs a signal prior")
        return self.cfg.sigma_w ** 2 + self.prior.second_moment / self.cfg.delta

    def F(self, tau_sq: float, alpha) -> Tuple[float, float]:
        """
        Evaluate the state evolution map

        Args:
            tau_sq: Current tau^2 (>= 0)
            alpha: Threshold direction of length p_se

        Returns:
            Tuple (F value, Monte-Carlo standard error)
        """
        if not tau_sq >= 0:
            raise ConfigError(f"tau_sq must be >= 0, got {tau_sq}")
        alpha = self._check_alpha(alpha)
        tau = float(np.sqrt(tau_sq))
        theta = alpha * tau
        draws = self.draws
        scale = self.cfg.delta * self.cfg.p_se

        def replicate(r: int) -> float:
            b, z = draws[r]
            err = prox_sorted_l1(b + tau * z, theta) - b
            return float(err @ err) / scale

        mean, stderr = mean_stderr(self._map(replicate))
        return self.cfg.sigma_w ** 2 + mean, stderr

    def unique_count(self, tau_sq: float, alpha) -> Tuple[float, float]:
        """
        Expected number of distinct nonzero magnitudes of prox(B + tau Z; alpha tau)

        Args:
            tau_sq: tau^2
            alpha: Threshold direction of length p_se

        Returns:
            Tuple (mean count, standard error)
        """
        alpha = self._check_alpha(alpha)
        tau = float(np.sqrt(max(tau_sq, 0.0)))
        theta = alpha * tau
        draws = self.draws

        def replicate(r: int) -> float:
            b, z = draws[r]
            return float(divergence_unique_nonzeros(prox_sorted_l1(b + tau * z, theta)))

        return mean_stderr(self._map(replicate))

    def fixed_point(
        self,
        alpha,
        tau0_sq: Optional[float] = None
    ) -> SeResult:
        """
        Iterate tau^2 <- F(tau^2) to the fixed point

        Args:
            alpha: Threshold direction of length p_se
            tau0_sq: Starting tau^2 (default sigma_w^2 + E[B^2] / delta)

        Returns:
            SeResult with the whole trajectory

        Raises:
            AlphaBelowAmin: f(alpha) >= delta, so no fixed point exists
        """
        alpha = self._check_alpha(alpha)
        f_value, _ = self.f_alpha(alpha)
        if f_value >= self.cfg.delta:
            raise AlphaBelowAmin(f_value, self.cfg.delta)

        tau_sq = self.tau0_sq if tau0_sq is None else float(tau0_sq)
        if not tau_sq >= 0:
            raise ConfigError(f"tau0_sq must be >= 0, got {tau0_sq}")

        trajectory = [tau_sq]
        stderr = 0.0
        for t in range(self.cfg.max_fp_iter):
            new_tau_sq, stderr = self.F(tau_sq, alpha)
            trajectory.append(new_tau_sq)
            done = abs(new_tau_sq - tau_sq) <= self.cfg.fp_tol * max(1.0, tau_sq)
            tau_sq = new_tau_sq
            logger.debug(f"SE t={t + 1} tau_sq={tau_sq:.8g}")
            if done:
                logger.info(f"SE fixed point tau*^2={tau_sq:.6g} after {t + 1} iterations")
                return SeResult(trajectory, tau_sq, True, stderr)

        result = SeResult(trajectory, tau_sq, False, stderr)
        raise NonConvergence("State evolution did not reach its fixed point",
                             self.cfg.max_fp_iter, result=result)

    def _f_replicate(self, r: int) -> np.ndarray:
        return stream(self.cfg.seed, 'f_alpha', r).standard_normal(self.cfg.p_se)

    def f_alpha(self, alpha) -> Tuple[float, float]:
        """
        Monte-Carlo estimate of f(alpha)

        Each atom I of v = prox(Z; alpha) with magnitude m contributes
        1 - m * sum(alpha over the ranks of I); zero outputs contribute nothing.

        Args:
            alpha: Threshold direction of length p_se

        Returns:
            Tuple (f value, standard error)
        """
        alpha = self._check_alpha(alpha)
        if self._f_draws is None:
            self._f_draws = self._map(self._f_replicate)
        draws = self._f_draws
        p = self.cfg.p_se

        def replicate(r: int) -> float:
            v = prox_sorted_l1(draws[r], alpha)
            assigned = rank_assigned(v, alpha)
            partition = magnitude_partition(v)
            total = 0.0
            for atom, magnitude in zip(partition.star_support, partition.magnitudes):
                total += 1.0 - magnitude * float(assigned[atom].sum())
            return total / p

        return mean_stderr(self._map(replicate))

    def f_alpha_stein(self, alpha) -> Tuple[float, float]:
        """
        Second estimate of f(alpha) as E||prox(Z; alpha)||^2 / p

        Stein's identity makes both estimators unbiased for the same quantity; they are
        computed on the same Z draws as f_alpha.

        Args:
            alpha: Threshold direction of length p_se

        Returns:
            Tuple (estimate, standard error)
        """
        alpha = self._check_alpha(alpha)
        if self._f_draws is None:
            self._f_draws = self._map(self._f_replicate)
        draws = self._f_draws
        p = self.cfg.p_se

        def replicate(r: int) -> float:
            v = prox_sorted_l1(draws[r], alpha)
            return float(v @ v) / p

        return mean_stderr(self._map(replicate))

    def alpha_min_scale(self, direction, rtol: float = AMIN_RTOL) -> float:
        """
        Scale a* with f(a* direction) = delta, found by bisection along the ray

        Args:
            direction: Non-increasing direction (rescaled so its largest entry is 1)
            rtol: Relative accuracy on a*

        Returns:
            a* (0 when delta >= 1, since f < 1 everywhere)
        """
        direction = self._check_alpha(direction)
        peak = float(direction.max())
        if peak <= 0:
            raise ConfigError("direction must not be all zero")
        direction = direction / peak
        delta = self.cfg.delta
        if delta >= 1:
            return 0.0

        def f(a: float) -> float:
            return self.f_alpha(a * direction)[0]

        lo, hi = 0.0, 1.0
        doublings = 0
        while f(hi) >= delta:
            lo, hi = hi, 2.0 * hi
            doublings += 1
            if doublings > _AMIN_MAX_DOUBLINGS:
                raise ConfigError("f(alpha) does not fall below delta along this direction")

        while hi - lo > rtol * hi:
            mid = 0.5 * (lo + hi)
            if f(mid) >= delta:
                lo = mid
            else:
                hi = mid

        a_star = 0.5 * (lo + hi)
        logger.info(f"A_min scale a*={a_star:.6g} at delta={delta}")
        return a_star

    def predicted_mse(self, tau_star_sq: float) -> float:
        """delta (tau*^2 - sigma_w^2)"""
        excess = float(tau_star_sq) - self.cfg.sigma_w ** 2
        if excess < 0:
            raise ValueError(f"tau*^2 = {tau_star_sq} is below sigma_w^2 = {self.cfg.sigma_w ** 2}")
        return self.cfg.delta * excess


def se_F(tau_sq: float, alpha, prior: PriorSpec, cfg: SeConfig) -> Tuple[float, float]:
    """F(tau^2) with its Monte-Carlo standard error"""
    return StateEvolution(prior, cfg).F(tau_sq, alpha)


def se_fixed_point(
    alpha,
    prior: PriorSpec,
    cfg: SeConfig,
    tau0_sq: Optional[float] = None
) -> SeResult:
    """Fixed point of the state evolution map, see StateEvolution.fixed_point"""
    return StateEvolution(prior, cfg).fixed_point(alpha, tau0_sq)


def f_alpha(alpha, cfg: SeConfig) -> float:
    """Monte-Carlo estimate of f(alpha)"""
    return StateEvolution(None, cfg).f_alpha(alpha)[0]


def f_alpha_stein(alpha, cfg: SeConfig) -> float:
    """f(alpha) through E||prox(Z; alpha)||^2 / p"""
    return StateEvolution(None, cfg).f_alpha_stein(alpha)[0]


def alpha_min_scale(direction, cfg: SeConfig) -> float:
    """Scale a* placing a* direction on the A_min boundary"""
    return StateEvolution(None, cfg).alpha_min_scale(direction)


def predicted_mse(tau_star_sq: float, cfg: SeConfig) -> float:
    """Asymptotic MSE of the SLOPE estimator"""
    return StateEvolution(None, cfg).predicted_mse(tau_star_sq)

"""
AMP iterate and AMP configuration models
"""

from typing import Optional, Sequence

import numpy as np

from config import AMP_MAX_ITER, AMP_OPT_TOL
from models.lambda_seq import LambdaSeq
from utils.errors import ConfigError


class AmpState:
    def __init__(self, beta: np.ndarray, z: np.ndarray, iter: int = 0):
        self.beta = np.asarray(beta, dtype=float)
        self.z = np.asarray(z, dtype=float)
        self.iter = int(iter)

    @property
    def n(self) -> int:
        return self.z.size

    @property
    def p(self) -> int:
        return self.beta.size

    @property
    def tau_hat(self) -> float:
        """Empirical noise level ||z|| / sqrt(n), always recomputed from z"""
        return float(np.linalg.norm(self.z) / np.sqrt(self.z.size))

    def to_dict(self) -> dict:
        """Convert state to dictionary"""
        return {
            'beta': self.beta.tolist(),
            'z': self.z.tolist(),
            'iter': self.iter,
            'tau_hat': self.tau_hat
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'AmpState':
        """Create state from dictionary"""
        return cls(
            beta=np.array(data.get('beta', []), dtype=float),
            z=np.array(data.get('z', []), dtype=float),
            iter=data.get('iter', 0)
        )

    def __str__(self) -> str:
        return f"AmpState(iter={self.iter}, tau_hat={self.tau_hat:.6g}, p={self.p}, n={self.n})"

    def __repr__(self) -> str:
        return self.__str__()


class AmpConfig:
    def __init__(
        self,
        alpha: LambdaSeq,
        max_iter: int = AMP_MAX_ITER,
        opt_tol: float = AMP_OPT_TOL,
        record_trajectory: bool = True,
        tau_schedule: Optional[Sequence[float]] = None
    ):
        if int(max_iter) < 1:
            raise ConfigError(f"max_iter must be >= 1, got {max_iter}")
        if not opt_tol > 0:
            raise ConfigError(f"opt_tol must be > 0, got {opt_tol}")
        self.alpha = alpha if isinstance(alpha, LambdaSeq) else LambdaSeq(alpha, penalty=False)
        self.max_iter = int(max_iter)
        self.opt_tol = float(opt_tol)
        self.record_trajectory = bool(record_trajectory)
        # tau_schedule[t] (a tau, not tau^2) replaces tau_hat at iteration t; the last
        # entry is reused once the schedule runs out
        self.tau_schedule = None if tau_schedule is None else np.asarray(tau_schedule, dtype=float)
        if self.tau_schedule is not None and (
            self.tau_schedule.size == 0 or np.any(self.tau_schedule < 0)
        ):
            raise ConfigError("tau_schedule must be a non-empty sequence of non-negative values")

    def tau_at(self, t: int) -> Optional[float]:
        if self.tau_schedule is None:
            return None
        return float(self.tau_schedule[min(t, self.tau_schedule.size - 1)])

    def to_dict(self) -> dict:
        """Convert config to dictionary"""
        return {
            'alpha': self.alpha.values.tolist(),
            'max_iter': self.max_iter,
            'opt_tol': self.opt_tol,
            'record_trajectory': self.record_trajectory,
            'tau_schedule': None if self.tau_schedule is None else self.tau_schedule.tolist()
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'AmpConfig':
        """Create config from dictionary"""
        return cls(
            alpha=LambdaSeq(data.get('alpha', []), penalty=False),
            max_iter=data.get('max_iter', AMP_MAX_ITER),
            opt_tol=data.get('opt_tol', AMP_OPT_TOL),
            record_trajectory=data.get('record_trajectory', True),
            tau_schedule=data.get('tau_schedule')
        )

    def __str__(self) -> str:
        return f"AmpConfig(p={len(self.alpha)}, max_iter={self.max_iter}, opt_tol={self.opt_tol:g})"

    def __repr__(self) -> str:
        return self.__str__()

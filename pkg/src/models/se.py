"""
State evolution configuration and result models
"""

from typing import List, Optional

from config import (
    DEFAULT_SEED,
    SE_DELTA,
    SE_FP_TOL,
    SE_MAX_FP_ITER,
    SE_MC_REPS,
    SE_P,
    SE_SIGMA_W,
)
from utils.errors import ConfigError


class SeConfig:
    def __init__(
        self,
        p_se: int = SE_P,
        mc_reps: int = SE_MC_REPS,
        seed: int = DEFAULT_SEED,
        fp_tol: float = SE_FP_TOL,
        max_fp_iter: int = SE_MAX_FP_ITER,
        sigma_w: float = SE_SIGMA_W,
        delta: float = SE_DELTA,
        workers: Optional[int] = None
    ):
        self.p_se = int(p_se)
        self.mc_reps = int(mc_reps)
        self.seed = int(seed)
        self.fp_tol = float(fp_tol)
        self.max_fp_iter = int(max_fp_iter)
        self.sigma_w = float(sigma_w)
        self.delta = float(delta)
        self.workers = None if workers is None else int(workers)
        self.validate()

    def validate(self):
        if self.p_se < 1:
            raise ConfigError(f"p_se must be >= 1, got {self.p_se}")
        if self.mc_reps < 1:
            raise ConfigError(f"mc_reps must be >= 1, got {self.mc_reps}")
        if not self.fp_tol > 0:
            raise ConfigError(f"fp_tol must be > 0, got {self.fp_tol}")
        if self.max_fp_iter < 1:
            raise ConfigError(f"max_fp_iter must be >= 1, got {self.max_fp_iter}")
        if self.sigma_w < 0:
            raise ConfigError(f"sigma_w must be >= 0, got {self.sigma_w}")
        if not 0 < self.delta < float('inf'):
            raise ConfigError(f"delta must lie in (0, inf), got {self.delta}")
        if self.seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed}")
        if self.workers is not None and self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")

    @property
    def n_se(self) -> float:
        """Number of measurements implied by p_se and delta"""
        return self.delta * self.p_se

    def with_p(self, p_se: int) -> 'SeConfig':
        """Copy with a different vector dimension"""
        data = self.to_dict()
        data['p_se'] = p_se
        return SeConfig.from_dict(data)

    def to_dict(self) -> dict:
        """Convert config to dictionary"""
        return {
            'p_se': self.p_se,
            'mc_reps': self.mc_reps,
            'seed': self.seed,
            'fp_tol': self.fp_tol,
            'max_fp_iter': self.max_fp_iter,
            'sigma_w': self.sigma_w,
            'delta': self.delta,
            'workers': self.workers
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'SeConfig':
        """Create config from dictionary"""
        return cls(
            p_se=data.get('p_se', SE_P),
            mc_reps=data.get('mc_reps', SE_MC_REPS),
            seed=data.get('seed', DEFAULT_SEED),
            fp_tol=data.get('fp_tol', SE_FP_TOL),
            max_fp_iter=data.get('max_fp_iter', SE_MAX_FP_ITER),
            sigma_w=data.get('sigma_w', SE_SIGMA_W),
            delta=data.get('delta', SE_DELTA),
            workers=data.get('workers')
        )

    def __str__(self) -> str:
        return (f"SeConfig(p_se={self.p_se}, mc_reps={self.mc_reps}, delta={self.delta}, "
                f"sigma_w={self.sigma_w}, seed={self.seed})")

    def __repr__(self) -> str:
        return self.__str__()


class SeResult:
    def __init__(
        self,
        tau_sq_trajectory: List[float],
        tau_star_sq: float,
        converged: bool,
        mc_stderr: float
    ):
        self.tau_sq_trajectory = list(tau_sq_trajectory)
        self.tau_star_sq = float(tau_star_sq)
        self.converged = bool(converged)
        self.mc_stderr = float(mc_stderr)

    @property
    def iterations(self) -> int:
        return len(self.tau_sq_trajectory) - 1

    def to_dict(self) -> dict:
        """Convert result to dictionary"""
        return {
            'tau_sq_trajectory': self.tau_sq_trajectory,
            'tau_star_sq': self.tau_star_sq,
            'converged': self.converged,
            'mc_stderr': self.mc_stderr,
            'iterations': self.iterations
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'SeResult':
        """Create result from dictionary"""
        return cls(
            tau_sq_trajectory=data.get('tau_sq_trajectory', []),
            tau_star_sq=data.get('tau_star_sq', 0.0),
            converged=data.get('converged', False),
            mc_stderr=data.get('mc_stderr', 0.0)
        )

    def __str__(self) -> str:
        return (f"SeResult(tau_star_sq={self.tau_star_sq:.6g}, converged={self.converged}, "
                f"iterations={self.iterations})")

    def __repr__(self) -> str:
        return self.__str__()

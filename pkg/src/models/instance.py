"""
Regression problem instance model
"""

from typing import Optional

import numpy as np

from models.prior import PriorSpec
from utils.errors import DimensionError


class ProblemInstance:
    def __init__(
        self,
        X: np.ndarray,
        y: np.ndarray,
        beta_true: Optional[np.ndarray] = None,
        w: Optional[np.ndarray] = None,
        prior: Optional[PriorSpec] = None,
        sigma_w: float = 0.0,
        seed: Optional[int] = None
    ):
        self.X = np.asarray(X, dtype=float)
        self.y = np.asarray(y, dtype=float).ravel()
        if self.X.ndim != 2:
            raise DimensionError(f"Design must be a matrix, got {self.X.ndim} dimensions")
        n, p = self.X.shape
        if self.y.size != n:
            raise DimensionError(f"Response has {self.y.size} entries, design has {n} rows")
        self.beta_true = None if beta_true is None else np.asarray(beta_true, dtype=float).ravel()
        if self.beta_true is not None and self.beta_true.size != p:
            raise DimensionError(f"Signal has {self.beta_true.size} entries, design has {p} columns")
        self.w = None if w is None else np.asarray(w, dtype=float).ravel()
        if self.w is not None and self.w.size != n:
            raise DimensionError(f"Noise has {self.w.size} entries, design has {n} rows")
        self.prior = prior
        self.sigma_w = float(sigma_w)
        self.seed = seed

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def delta(self) -> float:
        return self.n / self.p

    def recompute_y(self) -> np.ndarray:
        """y = X beta + w from the stored ground truth"""
        if self.beta_true is None:
            raise ValueError("Instance has no ground-truth signal")
        y = self.X @ self.beta_true
        if self.w is not None:
            y = y + self.w
        return y

    def to_dict(self) -> dict:
        """Convert instance metadata to dictionary (arrays are written separately)"""
        return {
            'n': self.n,
            'p': self.p,
            'delta': self.delta,
            'sigma_w': self.sigma_w,
            'seed': self.seed,
            'prior': self.prior.to_dict() if self.prior else None
        }

    def __str__(self) -> str:
        return f"ProblemInstance(n={self.n}, p={self.p}, sigma_w={self.sigma_w}, seed={self.seed})"

    def __repr__(self) -> str:
        return self.__str__()

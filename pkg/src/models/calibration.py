"""
Calibration result model
"""

from typing import Optional

import numpy as np

from models.lambda_seq import LambdaSeq


class CalibrationResult:
    def __init__(
        self,
        alpha: LambdaSeq,
        scale: float,
        tau_star_sq: float,
        lambda_check: np.ndarray,
        mc_stderr: float,
        lambda_stderr: Optional[np.ndarray] = None
    ):
        self.alpha = alpha
        self.scale = float(scale)
        self.tau_star_sq = float(tau_star_sq)
        # lambda(alpha) recomputed; may be negative or unordered close to A_min
        self.lambda_check = np.asarray(lambda_check, dtype=float)
        self.mc_stderr = float(mc_stderr)
        if lambda_stderr is None:
            lambda_stderr = np.zeros_like(self.lambda_check)
        self.lambda_stderr = np.asarray(lambda_stderr, dtype=float)

    def to_dict(self) -> dict:
        """Convert result to dictionary"""
        return {
            'alpha': self.alpha.values.tolist(),
            'scale': self.scale,
            'tau_star_sq': self.tau_star_sq,
            'lambda_check': self.lambda_check.tolist(),
            'mc_stderr': self.mc_stderr,
            'lambda_stderr': self.lambda_stderr.tolist()
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'CalibrationResult':
        """Create result from dictionary"""
        return cls(
            alpha=LambdaSeq(data.get('alpha', []), penalty=False),
            scale=data.get('scale', 0.0),
            tau_star_sq=data.get('tau_star_sq', 0.0),
            lambda_check=np.array(data.get('lambda_check', []), dtype=float),
            mc_stderr=data.get('mc_stderr', 0.0),
            lambda_stderr=np.array(data.get('lambda_stderr', []), dtype=float) if data.get('lambda_stderr') else None
        )

    def __str__(self) -> str:
        return (f"CalibrationResult(alpha_max={self.alpha.max:.6g}, scale={self.scale:.6g}, "
                f"tau_star_sq={self.tau_star_sq:.6g})")

    def __repr__(self) -> str:
        return self.__str__()

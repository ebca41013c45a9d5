"""
Regularization / threshold sequence model
"""

from typing import Sequence, Union

import numpy as np
from scipy.special import ndtri

from utils.errors import ConfigError


class LambdaSeq:
    """
    Non-increasing, non-negative weight sequence paired with sorted magnitudes.

    Used both for the SLOPE penalty lambda and for the AMP threshold direction alpha.
    With penalty=True (the default) the all-zero sequence is rejected.
    """

    def __init__(self, values: Union[Sequence[float], np.ndarray], penalty: bool = True):
        values = np.array(values, dtype=float).ravel()
        if values.size == 0:
            raise ConfigError("Sequence must have at least one entry")
        if not np.all(np.isfinite(values)):
            raise ConfigError("Sequence entries must be finite")
        if np.any(values < 0):
            raise ConfigError(f"Sequence entries must be >= 0 (min is {values.min():.6g})")
        if np.any(np.diff(values) > 0):
            i = int(np.argmax(np.diff(values) > 0))
            raise ConfigError(
                f"Sequence must be non-increasing (entry {i + 1} = {values[i + 1]:.6g} "
                f"> entry {i} = {values[i]:.6g})"
            )
        if penalty and not np.any(values > 0):
            raise ConfigError("All-zero sequence is not a valid penalty")
        values.setflags(write=False)
        self.values = values
        self.penalty = penalty

    @classmethod
    def constant(cls, p: int, value: float) -> 'LambdaSeq':
        return cls(np.full(int(p), float(value)), penalty=value > 0)

    @classmethod
    def linear(cls, p: int, start: float, stop: float) -> 'LambdaSeq':
        """Linearly decreasing sequence from start to stop (inclusive)"""
        return cls(np.linspace(float(start), float(stop), int(p)))

    @classmethod
    def bhq(cls, p: int, q: float, scale: float = 1.0) -> 'LambdaSeq':
        """
        Benjamini-Hochberg style weights lambda_i = Phi^-1(1 - i*q/(2p))

        Args:
            p: Length
            q: Target level in (0, 1)
            scale: Multiplier applied to every weight
        """
        if not 0 < q < 1:
            raise ConfigError(f"q must lie in (0, 1), got {q}")
        i = np.arange(1, int(p) + 1)
        return cls(scale * ndtri(1.0 - i * q / (2.0 * p)))

    def __len__(self) -> int:
        return self.values.size

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    @property
    def max(self) -> float:
        return float(self.values[0])

    @property
    def min(self) -> float:
        return float(self.values[-1])

    def normalized(self) -> 'LambdaSeq':
        """Direction with largest entry 1"""
        if self.max <= 0:
            raise ConfigError("Cannot normalize an all-zero sequence")
        return LambdaSeq(self.values / self.max)

    def scaled(self, factor: float) -> 'LambdaSeq':
        return LambdaSeq(self.values * float(factor), penalty=self.penalty and factor > 0)

    def to_dict(self) -> dict:
        """Convert sequence to dictionary"""
        return {'values': self.values.tolist()}

    @classmethod
    def from_dict(cls, data: dict, penalty: bool = True) -> 'LambdaSeq':
        """Create sequence from dictionary"""
        return cls(data.get('values', []), penalty=penalty)

    def __str__(self) -> str:
        return f"LambdaSeq(p={len(self)}, max={self.max:.4g}, min={self.min:.4g})"

    def __repr__(self) -> str:
        return self.__str__()


def as_array(seq: Union['LambdaSeq', Sequence[float], np.ndarray]) -> np.ndarray:
    """Plain float array view of a LambdaSeq or array-like"""
    if isinstance(seq, LambdaSeq):
        return seq.values
    return np.asarray(seq, dtype=float)

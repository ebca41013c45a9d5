"""
Signal prior model
"""

from typing import Optional, Sequence

import numpy as np

from utils.errors import ConfigError

PRIOR_KINDS = ('bernoulli_gaussian', 'point_mass', 'empirical')


class PriorSpec:
    def __init__(
        self,
        kind: str,
        eps: float = 0.1,
        sigma_b: float = 1.0,
        value: float = 0.0,
        sample: Optional[Sequence[float]] = None
    ):
        if kind not in PRIOR_KINDS:
            raise ConfigError(f"Unknown prior kind '{kind}' (expected one of {', '.join(PRIOR_KINDS)})")
        self.kind = kind
        self.eps = float(eps)
        self.sigma_b = float(sigma_b)
        self.value = float(value)
        self.sample_values = None if sample is None else np.asarray(sample, dtype=float).ravel()

        if kind == 'bernoulli_gaussian':
            if not 0.0 <= self.eps <= 1.0:
                raise ConfigError(f"eps must lie in [0, 1], got {self.eps}")
            if self.sigma_b < 0:
                raise ConfigError(f"sigma_b must be >= 0, got {self.sigma_b}")
        elif kind == 'point_mass':
            if not np.isfinite(self.value):
                raise ConfigError("point mass value must be finite")
        else:
            if self.sample_values is None or self.sample_values.size == 0:
                raise ConfigError("empirical prior needs a non-empty sample")
            if not np.all(np.isfinite(self.sample_values)):
                raise ConfigError("empirical sample must be finite")

    @classmethod
    def bernoulli_gaussian(cls, eps: float, sigma_b: float = 1.0) -> 'PriorSpec':
        return cls('bernoulli_gaussian', eps=eps, sigma_b=sigma_b)

    @classmethod
    def point_mass(cls, value: float = 0.0) -> 'PriorSpec':
        return cls('point_mass', value=value)

    @classmethod
    def empirical(cls, sample: Sequence[float]) -> 'PriorSpec':
        return cls('empirical', sample=sample)

    @property
    def second_moment(self) -> float:
        """E[B^2]"""
        if self.kind == 'bernoulli_gaussian':
            return self.eps * self.sigma_b ** 2
        if self.kind == 'point_mass':
            return self.value ** 2
        return float(np.mean(self.sample_values ** 2))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """
        Draw i.i.d. entries from the prior

        Args:
            rng: Random stream
            size: Number of entries

        Returns:
            Array of length size
        """
        if self.kind == 'bernoulli_gaussian':
            active = rng.random(size) < self.eps
            return np.where(active, self.sigma_b * rng.standard_normal(size), 0.0)
        if self.kind == 'point_mass':
            return np.full(size, self.value)
        return rng.choice(self.sample_values, size=size, replace=True)

    def to_dict(self) -> dict:
        """Convert prior to dictionary"""
        if self.kind == 'bernoulli_gaussian':
            return {'kind': self.kind, 'eps': self.eps, 'sigma_b': self.sigma_b}
        if self.kind == 'point_mass':
            return {'kind': self.kind, 'value': self.value}
        return {'kind': self.kind, 'sample': self.sample_values.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> 'PriorSpec':
        """Create prior from dictionary"""
        if not isinstance(data, dict):
            raise ConfigError(f"prior must be an object, got {type(data).__name__}")
        kind = data.get('kind')
        allowed = {
            'bernoulli_gaussian': {'kind', 'eps', 'sigma_b'},
            'point_mass': {'kind', 'value'},
            'empirical': {'kind', 'sample'},
        }.get(kind)
        if allowed is None:
            raise ConfigError(f"Unknown prior kind '{kind}'")
        unknown = set(data) - allowed
        if unknown:
            raise ConfigError(f"Unknown prior keys: {', '.join(sorted(unknown))}")
        return cls(
            kind=kind,
            eps=data.get('eps', 0.1),
            sigma_b=data.get('sigma_b', 1.0),
            value=data.get('value', 0.0),
            sample=data.get('sample')
        )

    def __str__(self) -> str:
        if self.kind == 'bernoulli_gaussian':
            return f"PriorSpec(bernoulli_gaussian, eps={self.eps}, sigma_b={self.sigma_b})"
        if self.kind == 'point_mass':
            return f"PriorSpec(point_mass, value={self.value})"
        return f"PriorSpec(empirical, n={self.sample_values.size})"

    def __repr__(self) -> str:
        return self.__str__()

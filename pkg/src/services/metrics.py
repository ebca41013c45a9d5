"""
Iterate quality metrics shared by every solver trace
"""

from typing import Callable, Optional

import numpy as np

from config import REFERENCE_SUPPORT_RTOL
from utils.errors import DimensionError


def opt_error(b_t: np.ndarray, b_ref: np.ndarray) -> float:
    """
    Optimization error ||b_t - b_ref||^2 / p

    Args:
        b_t: Iterate
        b_ref: Reference solution

    Returns:
        Mean squared distance
    """
    b_t = np.asarray(b_t, dtype=float).ravel()
    b_ref = np.asarray(b_ref, dtype=float).ravel()
    if b_t.size != b_ref.size:
        raise DimensionError(f"Length mismatch: {b_t.size} vs {b_ref.size}")
    diff = b_t - b_ref
    return float(diff @ diff / b_t.size)


def support_set_diff(
    b_t: np.ndarray,
    b_ref: np.ndarray,
    ref_rtol: float = REFERENCE_SUPPORT_RTOL
) -> int:
    """
    Size of the symmetric difference between supp(b_t) and supp(b_ref)

    Args:
        b_t: Iterate (support = exact nonzeros)
        b_ref: Reference solution (support = |b_ref| > ref_rtol * max|b_ref|)
        ref_rtol: Relative threshold applied to the reference only

    Returns:
        Number of indices in exactly one of the two supports
    """
    b_t = np.asarray(b_t, dtype=float).ravel()
    b_ref = np.asarray(b_ref, dtype=float).ravel()
    if b_t.size != b_ref.size:
        raise DimensionError(f"Length mismatch: {b_t.size} vs {b_ref.size}")
    peak = float(np.max(np.abs(b_ref))) if b_ref.size else 0.0
    ref_support = np.abs(b_ref) > ref_rtol * peak
    return int(np.count_nonzero((b_t != 0) != ref_support))


class TraceMonitor:
    """Computes the optional per-iterate metrics a solver trace records"""

    def __init__(
        self,
        beta_ref: Optional[np.ndarray] = None,
        cost_fn: Optional[Callable[[np.ndarray], float]] = None
    ):
        self.beta_ref = None if beta_ref is None else np.asarray(beta_ref, dtype=float).ravel()
        self.cost_fn = cost_fn

    def __call__(self, beta: np.ndarray) -> dict:
        metrics = {}
        if self.beta_ref is not None:
            metrics['opt_error'] = opt_error(beta, self.beta_ref)
            metrics['set_diff'] = support_set_diff(beta, self.beta_ref)
        if self.cost_fn is not None:
            metrics['cost'] = self.cost_fn(beta)
        return metrics

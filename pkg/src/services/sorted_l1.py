"""
Sorted-L1 norm service: norm, proximal operator, divergence, magnitude atoms
and subgradient membership
"""

import logging
from fractions import Fraction
from typing import Optional, Tuple, Union

import numpy as np

from config import SUBGRADIENT_RTOL, TIE_RTOL
from models.lambda_seq import LambdaSeq, as_array
from models.partition import MagnitudePartition
from utils.errors import DimensionError

logger = logging.getLogger(__name__)

ArrayOrSeq = Union[LambdaSeq, np.ndarray, list, tuple]


def _check_lengths(*named: Tuple[str, np.ndarray]) -> int:
    p = named[0][1].size
    for name, arr in named[1:]:
        if arr.size != p:
            raise DimensionError(
                f"Length mismatch: {named[0][0]} has {p} entries, {name} has {arr.size}"
            )
    return p


def default_tol(v: np.ndarray) -> float:
    """Tie tolerance TIE_RTOL * max(1, max|v|)"""
    v = np.asarray(v, dtype=float)
    peak = float(np.max(np.abs(v))) if v.size else 0.0
    return TIE_RTOL * max(1.0, peak)


def sorted_l1_norm(b: np.ndarray, lam: ArrayOrSeq) -> float:
    """
    Evaluate J_lambda(b) = sum_i lambda_i |b|_(i)

    Args:
        b: Vector
        lam: Non-increasing weights, same length as b

    Returns:
        Norm value (>= 0)
    """
    b = np.asarray(b, dtype=float).ravel()
    lam = as_array(lam).ravel()
    _check_lengths(('b', b), ('lambda', lam))
    return float(np.dot(np.sort(np.abs(b))[::-1], lam))


def _pool_non_increasing(w: np.ndarray) -> np.ndarray:
    # stack of blocks; merge while the previous block mean is strictly below the last one
    sums = []
    counts = []
    for wi in w:
        s, c = float(wi), 1
        while sums and sums[-1] / counts[-1] < s / c:
            s += sums.pop()
            c += counts.pop()
        sums.append(s)
        counts.append(c)
    means = np.array(sums) / np.array(counts)
    return np.repeat(means, counts)


def prox_sorted_l1(v: np.ndarray, theta: ArrayOrSeq) -> np.ndarray:
    """
    Proximal operator of the sorted-L1 norm, argmin_b 1/2||v - b||^2 + J_theta(b)

    Sorts |v| in decreasing order, fits a non-increasing sequence to |v|_(i) - theta_i
    by pooling adjacent blocks, clips at zero, then restores order and signs.

    Args:
        v: Input vector
        theta: Non-increasing, non-negative thresholds (all-zero allowed)

    Returns:
        The minimizer; zeros are exact and tied entries are bit-identical
    """
    v = np.asarray(v, dtype=float).ravel()
    theta = as_array(theta).ravel()
    _check_lengths(('v', v), ('theta', theta))

    mag = np.abs(v)
    order = np.argsort(-mag, kind='stable')
    fitted = np.maximum(_pool_non_increasing(mag[order] - theta), 0.0)

    out = np.empty_like(v)
    out[order] = fitted
    # + 0.0 turns -0.0 into 0.0
    return np.sign(v) * out + 0.0


def _split_by_spread(segment: np.ndarray, mag: np.ndarray, tol: float) -> list:
    # a run of small gaps can drift; every atom stays within tol of its largest entry
    values = mag[segment]
    if values[0] - values[-1] <= tol:
        return [segment]
    pieces = []
    start = 0
    for i in range(1, segment.size):
        if values[start] - values[i] > tol:
            pieces.append(segment[start:i])
            start = i
    pieces.append(segment[start:])
    return pieces


def magnitude_partition(b: np.ndarray, tol: Optional[float] = None) -> MagnitudePartition:
    """
    Split indices into maximal atoms of equal magnitude

    Args:
        b: Vector
        tol: Magnitudes closer than tol are merged (default TIE_RTOL * max(1, max|b|))

    Returns:
        MagnitudePartition with nonzero atoms in decreasing magnitude order and the
        zero atom (exact zeros) kept apart
    """
    b = np.asarray(b, dtype=float).ravel()
    if tol is None:
        tol = default_tol(b)
    mag = np.abs(b)

    zero_atom = np.flatnonzero(mag == 0)
    nonzero = np.flatnonzero(mag > 0)
    order = nonzero[np.argsort(-mag[nonzero], kind='stable')]

    atoms = []
    magnitudes = []
    if order.size:
        breaks = np.flatnonzero(-np.diff(mag[order]) > tol) + 1
        for segment in np.split(order, breaks):
            for atom in _split_by_spread(segment, mag, tol):
                atoms.append(np.sort(atom))
                magnitudes.append(float(np.mean(mag[atom])))

    return MagnitudePartition(atoms, magnitudes, zero_atom, tol)


def divergence_unique_nonzeros(b: np.ndarray, tol: Optional[float] = None) -> int:
    """
    Count distinct nonzero magnitudes of b (the ||b||_0* norm)

    Args:
        b: Vector
        tol: Tie tolerance, see magnitude_partition

    Returns:
        Number of atoms in the star support
    """
    return magnitude_partition(b, tol).n_unique_nonzero


def prox_jacobian_diagonal(v: np.ndarray, theta: ArrayOrSeq) -> np.ndarray:
    """Diagonal of d prox / d v: 1/D_i on nonzero outputs, 0 on zeros"""
    out = prox_sorted_l1(v, theta)
    counts = magnitude_partition(out).counts(out.size)
    diag = np.zeros(out.size)
    finite = np.isfinite(counts)
    diag[finite] = 1.0 / counts[finite]
    return diag


def prox_divergence(v: np.ndarray, theta: ArrayOrSeq) -> float:
    """
    Trace of the prox Jacobian, summed exactly over the per-entry 1/D_i terms

    Args:
        v: Input vector
        theta: Thresholds

    Returns:
        The divergence as a float (always an integer value)
    """
    out = prox_sorted_l1(v, theta)
    counts = magnitude_partition(out).counts(out.size)
    total = sum((Fraction(1, int(d)) for d in counts[np.isfinite(counts)]), Fraction(0))
    return float(total)


def rank_assigned(b: np.ndarray, lam: ArrayOrSeq) -> np.ndarray:
    """
    Place lambda on the positions of b by magnitude rank (largest |b| gets lambda_1)

    Args:
        b: Vector whose magnitudes define the ranking (ties broken by index)
        lam: Non-increasing weights

    Returns:
        Array with out[i] = lambda_{rank of |b_i|}
    """
    b = np.asarray(b, dtype=float).ravel()
    lam = as_array(lam).ravel()
    _check_lengths(('b', b), ('lambda', lam))
    out = np.empty_like(lam)
    out[np.argsort(-np.abs(b), kind='stable')] = lam
    return out


def _majorization_gap(u: np.ndarray, w: np.ndarray, equality: bool) -> float:
    cu = np.cumsum(np.sort(u)[::-1])
    cw = np.cumsum(np.sort(w)[::-1])
    gap = float(np.max(cu - cw))
    if equality:
        gap = max(gap, abs(float(cu[-1] - cw[-1])))
    return max(gap, 0.0)


def subgradient_distance(
    b: np.ndarray,
    g: np.ndarray,
    lam: ArrayOrSeq,
    tol: Optional[float] = None
) -> float:
    """
    Measure how far g is from the subdifferential of J_lambda at b

    Each nonzero atom I must satisfy g_I * sign(b_I) in the permutohedron of the
    lambdas assigned to I (majorization with equal totals); the zero atom must have
    |g_I| weakly majorized by its lambdas.

    Args:
        b: Point of evaluation
        g: Candidate subgradient
        lam: Non-increasing weights
        tol: Violations up to tol count as zero (default scales with max|lambda|, max|g|)

    Returns:
        0.0 for members, otherwise the largest violation (inf on a sign violation)
    """
    b = np.asarray(b, dtype=float).ravel()
    g = np.asarray(g, dtype=float).ravel()
    lam = as_array(lam).ravel()
    _check_lengths(('b', b), ('g', g), ('lambda', lam))
    if tol is None:
        tol = SUBGRADIENT_RTOL * max(1.0, float(np.max(np.abs(lam), initial=0.0)),
                                     float(np.max(np.abs(g), initial=0.0)))

    partition = magnitude_partition(b)
    assigned = rank_assigned(b, lam)

    worst = 0.0
    for atom in partition.star_support:
        u = g[atom] * np.sign(b[atom])
        if np.any(u < -tol):
            return float('inf')
        worst = max(worst, _majorization_gap(u, assigned[atom], equality=True))

    zeros = partition.zero_atom
    if zeros.size:
        worst = max(worst, _majorization_gap(np.abs(g[zeros]), assigned[zeros], equality=False))

    return 0.0 if worst <= tol else worst

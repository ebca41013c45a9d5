"""
Reproducible random streams

Every stream is a Philox (counter-based) generator keyed by (seed, role, index),
so any replicate can be regenerated on its own regardless of execution order.
"""

import numpy as np

from config import RNG_ROLES


def stream(seed: int, role: str, index: int = 0) -> np.random.Generator:
    """
    Get the random stream for one (seed, role, index) triple

    Args:
        seed: Base seed (unsigned 64-bit)
        role: Name of the quantity being drawn, a key of RNG_ROLES
        index: Replicate / task index within the role

    Returns:
        Independent numpy Generator
    """
    if role not in RNG_ROLES:
        raise KeyError(f"Unknown RNG role: {role}")
    seq = np.random.SeedSequence(int(seed), spawn_key=(RNG_ROLES[role], int(index)))
    return np.random.Generator(np.random.Philox(seq))

"""
Magnitude partition model (maximal atoms and star support)
"""

from typing import List, Optional

import numpy as np


class MagnitudePartition:
    def __init__(
        self,
        atoms: List[np.ndarray],
        magnitudes: List[float],
        zero_atom: Optional[np.ndarray] = None,
        tol: float = 0.0
    ):
        # atoms are ordered by decreasing magnitude; the zero atom (if any) is not among them
        self.atoms = atoms
        self.magnitudes = magnitudes
        self.zero_atom = zero_atom if zero_atom is not None else np.array([], dtype=int)
        self.tol = tol

    @property
    def star_support(self) -> List[np.ndarray]:
        """The nonzero atoms"""
        return self.atoms

    @property
    def n_unique_nonzero(self) -> int:
        return len(self.atoms)

    def counts(self, p: int) -> np.ndarray:
        """
        Size of the atom each index belongs to, inf on zero entries

        Args:
            p: Vector length

        Returns:
            Array D with D[i] = #{j : |v_j| = |v_i|} for v_i != 0
        """
        d = np.full(p, np.inf)
        for atom in self.atoms:
            d[atom] = atom.size
        return d

    def to_dict(self) -> dict:
        """Convert partition to dictionary"""
        return {
            'atoms': [atom.tolist() for atom in self.atoms],
            'magnitudes': list(self.magnitudes),
            'zero_atom': self.zero_atom.tolist(),
            'tol': self.tol
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'MagnitudePartition':
        """Create partition from dictionary"""
        return cls(
            atoms=[np.array(a, dtype=int) for a in data.get('atoms', [])],
            magnitudes=list(data.get('magnitudes', [])),
            zero_atom=np.array(data.get('zero_atom', []), dtype=int),
            tol=data.get('tol', 0.0)
        )

    def __str__(self) -> str:
        return (f"MagnitudePartition(nonzero_atoms={len(self.atoms)}, "
                f"zeros={self.zero_atom.size})")

    def __repr__(self) -> str:
        return self.__str__()

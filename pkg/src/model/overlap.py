"""Subvolume overlap matrices V_pq = sum_{x in v} f_p*(x) f_q(x).

Every moment of N_v is a polynomial in the entries of V. For a complete
basis V is the projection onto the subvolume written in mode coordinates,
so V is Hermitian and idempotent and (V^k)_00 = V_00 = m for every k.
"""

from dataclasses import dataclass

import numpy as np

from src.model.basis import BasisSet
from src.model.lattice import LatticeMismatchError, Subvolume

PROJECTION_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class OverlapMatrix:
    entries: np.ndarray
    m: float

    def __post_init__(self):
        entries = np.array(self.entries, dtype=complex)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValueError(f"Overlap matrix must be square, got {entries.shape}")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @classmethod
    def from_entries(cls, entries) -> "OverlapMatrix":
        entries = np.asarray(entries, dtype=complex)
        return cls(entries, float(entries[0, 0].real))

    @property
    def n_modes(self) -> int:
        return self.entries.shape[0]

    def hermiticity_residual(self) -> float:
        return float(np.max(np.abs(self.entries - self.entries.conj().T), initial=0.0))

    def idempotency_residual(self) -> float:
        return float(np.max(np.abs(self.entries @ self.entries - self.entries), initial=0.0))

    def is_projection(self, tol: float = PROJECTION_TOL) -> bool:
        return self.hermiticity_residual() <= tol and self.idempotency_residual() <= tol

    def chain_element(self, k: int) -> float:
        """(V^k)_00, which equals m for every k when V is a projection."""
        power = np.linalg.matrix_power(self.entries, k)
        return float(power[0, 0].real)


def overlap_matrix(basis: BasisSet, v: Subvolume) -> OverlapMatrix:
    """Gram matrix of the basis rows restricted to the sites of v."""
    if v.lattice != basis.lattice:
        raise LatticeMismatchError(
            f"Subvolume lattice ({v.lattice.n_sites} sites) differs from "
            f"basis lattice ({basis.lattice.n_sites} sites)"
        )
    restricted = basis.modes[:, list(v.sites)]
    entries = restricted.conj() @ restricted.T
    return OverlapMatrix(entries, float(entries[0, 0].real))

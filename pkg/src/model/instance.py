"""Seeded random problem instances: a basis with random f_0 and a subvolume."""

from dataclasses import dataclass

import numpy as np

from src.model.basis import BasisSet, build_basis, random_wavefunction
from src.model.lattice import Lattice, Subvolume, random_subvolume
from src.model.overlap import OverlapMatrix, overlap_matrix


@dataclass(frozen=True, eq=False)
class Instance:
    basis: BasisSet
    subvolume: Subvolume
    seed: tuple[int, ...]

    @property
    def overlap(self) -> OverlapMatrix:
        return overlap_matrix(self.basis, self.subvolume)

    @property
    def m(self) -> float:
        return self.overlap.m


def random_instance(
    n_sites: int,
    seed: int | tuple[int, ...],
    subvolume: Subvolume | None = None,
) -> Instance:
    """Random normalized f_0, its completed basis and a subvolume.

    Without an explicit subvolume a random proper, non-empty one is drawn
    from the same generator.
    """
    seed = tuple(seed) if isinstance(seed, (tuple, list)) else (int(seed),)
    rng = np.random.default_rng(list(seed))
    lattice = Lattice(n_sites)
    basis = build_basis(lattice, random_wavefunction(lattice, rng))
    if subvolume is None:
        subvolume = random_subvolume(lattice, rng)
    return Instance(basis, subvolume, seed)

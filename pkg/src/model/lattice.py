"""Finite one-dimensional lattice and subvolumes of it.

Space is a ring of ``n_sites`` points with unit weight per site, so the
inner product of two site functions is a plain sum and the closure relation
of a complete basis holds exactly.
"""

from dataclasses import dataclass

import numpy as np


class LatticeMismatchError(ValueError):
    """Raised when objects defined on different lattices are combined."""


@dataclass(frozen=True)
class Lattice:
    n_sites: int

    def __post_init__(self):
        if self.n_sites < 2:
            raise ValueError(f"Lattice needs at least 2 sites, got {self.n_sites}")

    def inner(self, f, g) -> complex:
        """Discrete inner product <f, g> = sum_x f*(x) g(x)."""
        return complex(np.vdot(np.asarray(f), np.asarray(g)))


@dataclass(frozen=True)
class Subvolume:
    """A set of lattice sites, stored sorted. Empty and full sets are legal."""

    lattice: Lattice
    sites: tuple[int, ...] = ()

    def __post_init__(self):
        sites = tuple(int(s) for s in self.sites)
        if len(sites) != len(set(sites)):
            raise ValueError(f"Subvolume sites must be unique, got {list(sites)}")
        for s in sites:
            if not 0 <= s < self.lattice.n_sites:
                raise ValueError(
                    f"Site {s} outside lattice of {self.lattice.n_sites} sites"
                )
        object.__setattr__(self, "sites", tuple(sorted(sites)))

    @classmethod
    def full(cls, lattice: Lattice) -> "Subvolume":
        return cls(lattice, tuple(range(lattice.n_sites)))

    @classmethod
    def empty(cls, lattice: Lattice) -> "Subvolume":
        return cls(lattice, ())

    def __len__(self) -> int:
        return len(self.sites)

    def indicator(self) -> np.ndarray:
        mask = np.zeros(self.lattice.n_sites, dtype=bool)
        mask[list(self.sites)] = True
        return mask


def random_subvolume(
    lattice: Lattice,
    rng: np.random.Generator,
    size: int | None = None,
) -> Subvolume:
    """Draw a random proper, non-empty subvolume (or one of the given size)."""
    if size is None:
        size = int(rng.integers(1, lattice.n_sites))
    if not 0 <= size <= lattice.n_sites:
        raise ValueError(f"Subvolume size {size} outside [0, {lattice.n_sites}]")
    sites = rng.choice(lattice.n_sites, size=size, replace=False)
    return Subvolume(lattice, tuple(int(s) for s in sites))

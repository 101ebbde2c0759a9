"""Orthonormal mode bases on the lattice.

Row 0 of every basis is the occupied mode f_0; the remaining rows are the
vacuum modes. A basis is complete when it has as many rows as the lattice
has sites, in which case the closure relation holds to machine precision.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy import linalg
from scipy.stats import unitary_group

from src.model.lattice import Lattice

logger = logging.getLogger(__name__)

ORTHONORMALITY_TOL = 1e-12
NORMALIZATION_TOL = 1e-8
# Below this norm the occupied mode cannot be renormalized
DEGENERATE_NORM = 1e-14


class DegenerateInputError(ValueError):
    """Raised when the occupied mode has (numerically) zero norm."""


@dataclass(frozen=True, eq=False)
class BasisSet:
    """M x n_sites complex matrix, row p = f_p sampled at every site."""

    lattice: Lattice
    modes: np.ndarray

    def __post_init__(self):
        modes = np.array(self.modes, dtype=complex)
        if modes.ndim != 2 or modes.shape[1] != self.lattice.n_sites:
            raise ValueError(
                f"Basis rows must have {self.lattice.n_sites} entries, "
                f"got shape {modes.shape}"
            )
        if modes.shape[0] > self.lattice.n_sites:
            raise ValueError("A basis cannot have more modes than lattice sites")
        defect = orthonormality_residual(modes)
        if defect > ORTHONORMALITY_TOL:
            raise ValueError(f"Basis rows are not orthonormal (residual {defect:.3e})")
        modes.setflags(write=False)
        object.__setattr__(self, "modes", modes)

    @property
    def n_modes(self) -> int:
        return self.modes.shape[0]

    @property
    def is_complete(self) -> bool:
        return self.n_modes == self.lattice.n_sites

    @property
    def occupied(self) -> np.ndarray:
        return self.modes[0]


def orthonormality_residual(modes: np.ndarray) -> float:
    """max |<f_p, f_q> - delta_pq| over all row pairs."""
    gram = modes.conj() @ modes.T
    return float(np.max(np.abs(gram - np.eye(modes.shape[0]))))


def fourier_basis(lattice: Lattice) -> BasisSet:
    """Discrete Fourier family, one plane wave per row."""
    return BasisSet(lattice, linalg.dft(lattice.n_sites, scale="sqrtn"))


def build_basis(lattice: Lattice, f0) -> BasisSet:
    """Complete orthonormal basis whose row 0 is the normalized f0.

    The Fourier member with the largest overlap with f0 is replaced by f0 and
    the set is re-orthonormalized with a QR factorization. Column phases are
    fixed so that R has a positive diagonal, which keeps row 0 equal to f0.
    """
    f0 = np.asarray(f0, dtype=complex).reshape(-1)
    if f0.shape != (lattice.n_sites,):
        raise ValueError(
            f"f0 must have {lattice.n_sites} entries, got {f0.shape[0]}"
        )
    norm = float(np.linalg.norm(f0))
    if norm < DEGENERATE_NORM:
        raise DegenerateInputError("Occupied mode f0 is the zero vector")
    if abs(norm - 1.0) > NORMALIZATION_TOL:
        logger.debug("Renormalizing f0 (norm %.6g)", norm)
    f0 = f0 / norm

    seed_rows = fourier_basis(lattice).modes
    replaced = int(np.argmax(np.abs(seed_rows.conj() @ f0)))
    others = np.delete(seed_rows, replaced, axis=0)

    q, r = np.linalg.qr(np.vstack([f0, others]).T)
    diagonal = np.diag(r)
    q = q * (diagonal / np.abs(diagonal))
    return BasisSet(lattice, q.T)


def random_wavefunction(lattice: Lattice, rng: np.random.Generator) -> np.ndarray:
    """Normalized complex Gaussian vector over the sites."""
    f = rng.normal(size=lattice.n_sites) + 1j * rng.normal(size=lattice.n_sites)
    return f / np.linalg.norm(f)


def closure_residual(basis: BasisSet) -> float:
    """max over (z, x) of |sum_p f_p*(z) f_p(x) - delta_zx|.

    An incomplete basis is flagged with a warning; the residual is still
    returned.
    """
    if not basis.is_complete:
        logger.warning(
            "Closure checked on an incomplete basis (%d modes, %d sites)",
            basis.n_modes, basis.lattice.n_sites,
        )
    modes = basis.modes
    kernel = modes.conj().T @ modes
    return float(np.max(np.abs(kernel - np.eye(basis.lattice.n_sites))))


def randomize_completion(basis: BasisSet, seed: int) -> BasisSet:
    """Same occupied mode, a different orthonormal completion.

    The vacuum rows 1..M-1 are mixed by a Haar-random unitary, which keeps
    them orthonormal and orthogonal to f_0.
    """
    rng = np.random.default_rng(seed)
    rest = basis.modes[1:]
    if rest.shape[0] == 0:
        return basis
    if rest.shape[0] == 1:
        mixing = np.exp(2j * np.pi * rng.random()) * np.eye(1)
    else:
        mixing = unitary_group.rvs(rest.shape[0], random_state=rng)
    return BasisSet(basis.lattice, np.vstack([basis.modes[:1], mixing @ rest]))


def drop_mode(basis: BasisSet, index: int) -> BasisSet:
    """Incomplete basis with vacuum row ``index`` removed."""
    if not 1 <= index < basis.n_modes:
        raise ValueError(
            f"Can only drop a vacuum mode (1..{basis.n_modes - 1}), got {index}"
        )
    return BasisSet(basis.lattice, np.delete(basis.modes, index, axis=0))

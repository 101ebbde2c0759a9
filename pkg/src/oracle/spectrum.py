"""Distribution of N_v in the vacuum state.

The vacuum decomposes over the eigenspaces of N_v; the weight of an
eigenvalue is the squared norm of the vacuum's projection onto its
eigenspace. Small spaces are diagonalized densely. Larger ones use the
Krylov space generated from the vacuum, which carries the same
distribution and has at most one dimension per distinct eigenvalue.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy import linalg, sparse

from src.oracle.fock import FockSpace

logger = logging.getLogger(__name__)

MERGE_TOL = 1e-9
WEIGHT_FLOOR = 1e-12
DENSE_MAX_DIMENSION = 1024
KRYLOV_BREAKDOWN = 1e-10


@dataclass(frozen=True)
class SpectralDistribution:
    atoms: tuple[tuple[float, float], ...]

    def __post_init__(self):
        eigenvalues = [value for value, _ in self.atoms]
        if eigenvalues != sorted(eigenvalues):
            raise ValueError("Atoms must be sorted by eigenvalue")
        if any(weight < 0 for _, weight in self.atoms):
            raise ValueError("Atom weights must be non-negative")

    @property
    def total_weight(self) -> float:
        return float(sum(weight for _, weight in self.atoms))

    def moment(self, k: int) -> float:
        return float(sum(value**k * weight for value, weight in self.atoms))

    def weight_at(self, value: float, tol: float = MERGE_TOL) -> float:
        return float(sum(w for v, w in self.atoms if abs(v - value) <= tol))

    def to_rows(self) -> list[tuple[float, float]]:
        return list(self.atoms)


def _merge(eigenvalues: np.ndarray, weights: np.ndarray) -> SpectralDistribution:
    order = np.argsort(eigenvalues)
    atoms: list[list[float]] = []
    for value, weight in zip(eigenvalues[order], weights[order]):
        if atoms and value - atoms[-1][0] <= MERGE_TOL:
            total = atoms[-1][1] + weight
            # weighted position keeps the atom inside its cluster
            if total > 0:
                atoms[-1][0] = (atoms[-1][0] * atoms[-1][1] + value * weight) / total
            atoms[-1][1] = total
        else:
            atoms.append([float(value), float(weight)])
    return SpectralDistribution(
        tuple((float(v), float(w)) for v, w in atoms if w >= WEIGHT_FLOOR)
    )


def _dense(n_v: sparse.spmatrix) -> tuple[np.ndarray, np.ndarray]:
    eigenvalues, vectors = linalg.eigh(n_v.toarray())
    return eigenvalues, np.abs(vectors[0, :]) ** 2


def _krylov(n_v: sparse.spmatrix, start: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    basis = [start / np.linalg.norm(start)]
    while len(basis) < n_v.shape[0]:
        candidate = n_v @ basis[-1]
        # two Gram-Schmidt passes against the whole basis
        for _ in range(2):
            for q in basis:
                candidate = candidate - np.vdot(q, candidate) * q
        norm = np.linalg.norm(candidate)
        if norm < KRYLOV_BREAKDOWN:
            break
        basis.append(candidate / norm)
    q = np.column_stack(basis)
    projected = q.conj().T @ (n_v @ q)
    eigenvalues, vectors = linalg.eigh((projected + projected.conj().T) / 2)
    logger.debug("Krylov space of dimension %d", q.shape[1])
    return eigenvalues, np.abs(vectors[0, :]) ** 2


def spectral_distribution(fock: FockSpace, n_v: sparse.spmatrix) -> SpectralDistribution:
    """Eigenvalues of N_v weighted by the vacuum's overlap with their eigenspaces."""
    n_v = sparse.csr_matrix(n_v)
    asymmetry = abs(n_v - n_v.conj().T)
    if asymmetry.nnz and asymmetry.max() > 1e-10:
        raise ValueError(f"N_v is not Hermitian (residual {asymmetry.max():.3g})")
    if fock.dimension <= DENSE_MAX_DIMENSION:
        eigenvalues, weights = _dense(n_v)
    else:
        eigenvalues, weights = _krylov(n_v, fock.vacuum())
    return _merge(eigenvalues, weights)


def bernoulli_deviation(dist: SpectralDistribution, m: float, tol: float = MERGE_TOL) -> float:
    """Largest departure from P(1) = m and P(0) = 1 - m."""
    off_support = sum(
        w for v, w in dist.atoms if abs(v) > tol and abs(v - 1.0) > tol
    )
    return float(
        max(
            abs(dist.weight_at(0.0, tol) - (1.0 - m)),
            abs(dist.weight_at(1.0, tol) - m),
            off_support,
        )
    )


def matches_bernoulli(
    dist: SpectralDistribution, m: float, tol: float = MERGE_TOL,
) -> tuple[bool, float]:
    deviation = bernoulli_deviation(dist, m, tol)
    return deviation <= tol, deviation

"""Explicit Fock-space matrices for the mode algebra.

Fermion modes use the Jordan-Wigner sign strings, so the anticommutators
hold exactly with integer entries. Bosonic modes are truncated at a maximal
occupation ``cutoff``. In every flavor mode 0 is the most significant digit
of the occupation-number index and the vacuum is basis state 0.

The coherent flavor keeps the occupied mode as the number 1: its ladder
matrices are the identity and only the vacuum modes 1..M-1 span the space.
"""

import logging
from dataclasses import dataclass
from functools import cached_property, reduce
from math import ceil

import numpy as np
from scipy import sparse

from src.algebra.operators import OperatorSymbol, Statistics
from src.model.overlap import OverlapMatrix

logger = logging.getLogger(__name__)

FERMION_MAX_MODES = 14
BOSON_MAX_DIMENSION = 20_000
HERMITICITY_TOL = 1e-10


class DimensionBudgetError(ValueError):
    """Raised when a Fock space would exceed the configured size budget."""


class NonHermitianOverlapError(ValueError):
    """Raised when an overlap matrix is not Hermitian."""


_SIGMA_Z = sparse.csr_matrix(np.array([[1, 0], [0, -1]], dtype=np.int64))
_LOWER = sparse.csr_matrix(np.array([[0, 1], [0, 0]], dtype=np.int64))


def _kron_all(factors) -> sparse.csr_matrix:
    return sparse.csr_matrix(reduce(lambda a, b: sparse.kron(a, b, format="csr"), factors))


def _fermion_annihilators(n_modes: int) -> list[sparse.csr_matrix]:
    identity = sparse.identity(2, dtype=np.int64, format="csr")
    ops = []
    for p in range(n_modes):
        factors = [_SIGMA_Z] * p + [_LOWER] + [identity] * (n_modes - p - 1)
        op = _kron_all(factors)
        op.eliminate_zeros()
        ops.append(op)
    return ops


def _boson_annihilators(n_modes: int, cutoff: int) -> list[sparse.csr_matrix]:
    levels = cutoff + 1
    single = sparse.diags(np.sqrt(np.arange(1, levels, dtype=float)), offsets=1, format="csr")
    identity = sparse.identity(levels, format="csr")
    return [
        _kron_all([identity] * p + [single] + [identity] * (n_modes - p - 1))
        for p in range(n_modes)
    ]


@dataclass(frozen=True, eq=False)
class FockSpace:
    stats: Statistics
    n_modes: int
    cutoff: int
    annihilators: tuple[sparse.csr_matrix, ...]

    @property
    def dimension(self) -> int:
        return self.annihilators[0].shape[0]

    @cached_property
    def creators(self) -> tuple[sparse.csr_matrix, ...]:
        return tuple(sparse.csr_matrix(a.conj().T) for a in self.annihilators)

    @cached_property
    def identity(self) -> sparse.csr_matrix:
        return sparse.identity(self.dimension, format="csr")

    def vacuum(self) -> np.ndarray:
        state = np.zeros(self.dimension, dtype=complex)
        state[0] = 1.0
        return state

    @property
    def bosonic_modes(self) -> range:
        """Modes represented by truncated ladder matrices."""
        if self.stats is Statistics.FERMION:
            return range(0)
        start = 1 if self.stats is Statistics.COHERENT else 0
        return range(start, self.n_modes)

    def below_cutoff(self) -> np.ndarray:
        """Basis states in which no bosonic mode sits at the cutoff."""
        keep = np.ones(self.dimension, dtype=bool)
        for p in self.bosonic_modes:
            occupation = (self.creators[p] @ self.annihilators[p]).diagonal().real
            keep &= occupation < self.cutoff - 0.5
        return keep


def build_fock(stats: Statistics, n_modes: int, cutoff: int = 3) -> FockSpace:
    """Ladder matrices for ``n_modes`` modes under the given statistics."""
    stats = Statistics(stats)
    if n_modes < 1:
        raise ValueError(f"n_modes must be >= 1, got {n_modes}")
    if stats is Statistics.FERMION:
        if n_modes > FERMION_MAX_MODES:
            raise DimensionBudgetError(
                f"Fermion space with {n_modes} modes exceeds {FERMION_MAX_MODES} modes"
            )
        return FockSpace(stats, n_modes, 1, tuple(_fermion_annihilators(n_modes)))

    if cutoff < 1:
        raise ValueError(f"cutoff must be >= 1, got {cutoff}")
    bosonic = n_modes - 1 if stats is Statistics.COHERENT else n_modes
    dimension = (cutoff + 1) ** bosonic
    if dimension > BOSON_MAX_DIMENSION:
        raise DimensionBudgetError(
            f"Boson space of dimension {dimension} exceeds {BOSON_MAX_DIMENSION}"
        )
    if stats is Statistics.BOSON:
        return FockSpace(stats, n_modes, cutoff, tuple(_boson_annihilators(n_modes, cutoff)))

    ops = _boson_annihilators(bosonic, cutoff) if bosonic else []
    identity = sparse.identity(dimension, format="csr")
    return FockSpace(stats, n_modes, cutoff, tuple([identity] + ops))


def number_operator(fock: FockSpace, v: OverlapMatrix) -> sparse.csr_matrix:
    """N_v = sum_pq V_pq O_p† O_q with O_0 = b_0† and O_q = b_q otherwise."""
    if v.n_modes != fock.n_modes:
        raise ValueError(f"Overlap matrix has {v.n_modes} modes, Fock space {fock.n_modes}")
    residual = v.hermiticity_residual()
    if residual > HERMITICITY_TOL:
        raise NonHermitianOverlapError(f"Overlap matrix is not Hermitian (residual {residual:.3g})")

    # O_q and O_q† as matrices
    fields = [fock.creators[0]] + list(fock.annihilators[1:])
    adjoints = [fock.annihilators[0]] + list(fock.creators[1:])
    entries = v.entries
    total = sparse.csr_matrix((fock.dimension, fock.dimension), dtype=complex)
    for p in range(fock.n_modes):
        row = sum(
            (entries[p, q] * fields[q] for q in range(fock.n_modes) if entries[p, q] != 0),
            sparse.csr_matrix((fock.dimension, fock.dimension), dtype=complex),
        )
        total = total + adjoints[p] @ row
    total.eliminate_zeros()
    return sparse.csr_matrix(total)


def _warn_truncation(fock: FockSpace, k: int) -> None:
    if fock.stats is not Statistics.FERMION and fock.cutoff < ceil(k / 2):
        logger.warning(
            "Boson cutoff %d is below %d; moment k=%d is affected by truncation",
            fock.cutoff, ceil(k / 2), k,
        )


def vacuum_moment(fock: FockSpace, n_v: sparse.spmatrix, k: int) -> float:
    """<0| N_v^k |0> by repeated application to the vacuum vector."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    _warn_truncation(fock, k)
    state = fock.vacuum()
    for _ in range(k):
        state = n_v @ state
    return float(state[0].real)


def vacuum_moments(fock: FockSpace, n_v: sparse.spmatrix, k_max: int) -> list[float]:
    """<0| N_v^k |0> for k = 1..k_max in one pass."""
    _warn_truncation(fock, k_max)
    state = fock.vacuum()
    moments = []
    for _ in range(k_max):
        state = n_v @ state
        moments.append(float(state[0].real))
    return moments


def _operator_matrix(fock: FockSpace, op: OperatorSymbol) -> sparse.csr_matrix:
    index = op.index
    if index.is_symbolic:
        raise ValueError(f"Oracle needs concrete mode ids, got symbolic {index}")
    mode = 0 if index.is_occupied else index.value
    if not 0 <= mode < fock.n_modes:
        raise ValueError(f"Mode {mode} outside 0..{fock.n_modes - 1}")
    return fock.creators[mode] if op.is_create else fock.annihilators[mode]


def operator_string_element(fock: FockSpace, string) -> complex:
    """<0| A_1 ... A_n |0> for a string of concrete operator symbols."""
    state = fock.vacuum()
    for op in reversed(tuple(string)):
        state = _operator_matrix(fock, op) @ state
    return complex(state[0])


def algebra_residual(fock: FockSpace) -> float:
    """Largest entry of the (anti)commutation identities that should vanish.

    For truncated bosons the identities are checked on the states below the
    cutoff only.
    """
    fermionic = fock.stats is Statistics.FERMION
    modes = range(fock.n_modes) if fermionic else fock.bosonic_modes
    keep = np.arange(fock.dimension) if fermionic else np.flatnonzero(fock.below_cutoff())
    sign = 1 if fermionic else -1
    worst = 0.0
    for p in modes:
        for q in modes:
            a_p, a_q, c_q = fock.annihilators[p], fock.annihilators[q], fock.creators[q]
            mixed = a_p @ c_q + sign * (c_q @ a_p)
            if p == q:
                mixed = mixed - fock.identity
            like = a_p @ a_q + sign * (a_q @ a_p)
            for residual in (mixed, like):
                block = residual[keep][:, keep]
                if block.nnz:
                    worst = max(worst, float(np.max(np.abs(block.data))))
    return worst

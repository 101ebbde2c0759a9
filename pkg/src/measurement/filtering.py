"""Filtering the field onto the eigenfunctions of an observable.

For eigenfunctions g_n the filtered field is

    psi_n = sum_x g_n*(x) psi(x) = sum_i f_in O_i,   f_in = <g_n, f_i>,

so psi_n† psi_n has the same form as N_v with the rank-one overlap
V_pq = f_pn* f_qn. Its first moment is |f_0n|^2, the probability of
outcome n.
"""

import logging
from dataclasses import dataclass
from math import ceil

import numpy as np
from scipy.stats import unitary_group

from src.algebra.moments import moment_expression
from src.algebra.operators import Statistics
from src.model.basis import ORTHONORMALITY_TOL, BasisSet, orthonormality_residual
from src.model.lattice import Lattice, LatticeMismatchError
from src.model.overlap import OverlapMatrix
from src.moments.suite import MomentReport, MomentRow
from src.oracle.fock import build_fock, number_operator, vacuum_moments

logger = logging.getLogger(__name__)

COLUMN_NORM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Observable:
    """Nondegenerate observable: eigenfunctions as rows, one eigenvalue each."""

    lattice: Lattice
    eigenbasis: np.ndarray
    eigenvalues: np.ndarray

    def __post_init__(self):
        g = np.array(self.eigenbasis, dtype=complex)
        values = np.array(self.eigenvalues, dtype=float)
        n = self.lattice.n_sites
        if g.shape != (n, n):
            raise ValueError(f"Eigenbasis must be {n} x {n}, got {g.shape}")
        defect = orthonormality_residual(g)
        if defect > ORTHONORMALITY_TOL:
            raise ValueError(f"Eigenbasis is not orthonormal (residual {defect:.3e})")
        if values.shape != (n,):
            raise ValueError(f"Need {n} eigenvalues, got {values.shape[0]}")
        if len(np.unique(values)) != n:
            raise ValueError("Eigenvalues must be pairwise distinct")
        g.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "eigenbasis", g)
        object.__setattr__(self, "eigenvalues", values)

    @property
    def n_outcomes(self) -> int:
        return self.eigenbasis.shape[0]


def position_observable(lattice: Lattice) -> Observable:
    """Site position: eigenfunctions are site indicators, eigenvalue = site."""
    n = lattice.n_sites
    return Observable(lattice, np.eye(n), np.arange(n, dtype=float))


def random_observable(lattice: Lattice, seed: int) -> Observable:
    rng = np.random.default_rng(seed)
    g = unitary_group.rvs(lattice.n_sites, random_state=rng)
    values = np.sort(rng.normal(size=lattice.n_sites))
    return Observable(lattice, g, values)


def observable_from_basis(basis: BasisSet, eigenvalues=None) -> Observable:
    if not basis.is_complete:
        raise ValueError("Observable eigenbasis must be complete")
    n = basis.lattice.n_sites
    values = np.arange(n, dtype=float) if eigenvalues is None else eigenvalues
    return Observable(basis.lattice, basis.modes, values)


@dataclass(frozen=True, eq=False)
class FilterCoefficients:
    f_in: np.ndarray
    eigenvalues: np.ndarray
    n_sites: int

    @property
    def n_modes(self) -> int:
        return self.f_in.shape[0]

    @property
    def n_outcomes(self) -> int:
        return self.f_in.shape[1]

    def column_norms(self) -> np.ndarray:
        return np.sum(np.abs(self.f_in) ** 2, axis=0)

    def column_norm_residual(self) -> float:
        return float(np.max(np.abs(self.column_norms() - 1.0)))

    def filter_vector(self, n: int) -> np.ndarray:
        """u with u_p = f_pn*, so that V = u u†."""
        if not 0 <= n < self.n_outcomes:
            raise ValueError(f"Outcome {n} outside 0..{self.n_outcomes - 1}")
        return self.f_in[:, n].conj()


def filter_coefficients(basis: BasisSet, obs: Observable) -> FilterCoefficients:
    """f_in = <g_n, f_i> for every mode i and outcome n."""
    if basis.lattice != obs.lattice:
        raise LatticeMismatchError(
            f"Basis lattice ({basis.lattice.n_sites} sites) differs from "
            f"observable lattice ({obs.lattice.n_sites} sites)"
        )
    f_in = basis.modes @ obs.eigenbasis.conj().T
    fc = FilterCoefficients(f_in, obs.eigenvalues, basis.lattice.n_sites)
    residual = fc.column_norm_residual()
    if residual > COLUMN_NORM_TOL:
        logger.warning("Filter columns not normalized (residual %.3g)", residual)
    return fc


def filtered_overlap(fc: FilterCoefficients, outcomes) -> OverlapMatrix:
    """sum over n in outcomes of u_n u_n†."""
    entries = np.zeros((fc.n_modes, fc.n_modes), dtype=complex)
    for n in outcomes:
        u = fc.filter_vector(int(n))
        entries += np.outer(u, u.conj())
    return OverlapMatrix.from_entries(entries)


def filtered_moments(
    fc: FilterCoefficients,
    n: int,
    k_max: int,
    stats: Statistics = Statistics.FERMION,
    cutoff: int | None = None,
) -> MomentReport:
    """Oracle moments of psi_n† psi_n next to the symbolic moments at m = |f_0n|^2.

    The report's subvolume field holds the outcome index.
    """
    stats = Statistics(stats)
    v = filtered_overlap(fc, [n])
    cutoff = cutoff if cutoff is not None else max(1, ceil(k_max / 2))
    fock = build_fock(stats, fc.n_modes, cutoff)
    oracle = vacuum_moments(fock, number_operator(fock, v), k_max)
    rows = tuple(
        MomentRow(k, moment_expression(k, stats).evaluate(v.m), oracle[k - 1])
        for k in range(1, k_max + 1)
    )
    return MomentReport(
        trial=n,
        seed=(),
        stats=stats,
        n_sites=fc.n_sites,
        n_modes=fc.n_modes,
        subvolume=(n,),
        m=v.m,
        rows=rows,
    )


def outcome_distribution(fc: FilterCoefficients) -> list[tuple[float, float]]:
    """(eigenvalue, |f_0n|^2) per outcome."""
    probabilities = np.abs(fc.f_in[0, :]) ** 2
    return [(float(e), float(p)) for e, p in zip(fc.eigenvalues, probabilities)]


def outcome_table(
    fc: FilterCoefficients,
    k_max: int = 4,
    stats: Statistics = Statistics.FERMION,
    cutoff: int | None = None,
) -> list[dict]:
    """Rows (n, eigenvalue, probability, moment_1..moment_k) for CSV output."""
    rows = []
    for n, (eigenvalue, probability) in enumerate(outcome_distribution(fc)):
        report = filtered_moments(fc, n, k_max, stats, cutoff)
        row = {"n": n, "eigenvalue": eigenvalue, "probability": probability}
        row.update({f"moment_{r.k}": r.oracle for r in report.rows})
        rows.append(row)
    return rows

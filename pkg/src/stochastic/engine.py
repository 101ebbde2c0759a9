"""Monte Carlo sampling of the classical field psi = f_0 + sum_i a_i f_i.

The occupied mode always enters with amplitude 1. Counts N_v are sums of the
full density |psi|^2 over a subvolume, interference with f_0 included. The
subtracted count removes the expected vacuum power in v,

    background(v) = <|a|^2> sum_{i != 0} sum_{x in v} |f_i(x)|^2,

so that its mean is m.

Ensembles are drawn in chunks. Chunk c uses the c-th child of
SeedSequence(seed) and chunks are reduced in index order, so summaries do
not depend on how many threads ran them.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from src.model.basis import BasisSet
from src.model.lattice import LatticeMismatchError, Subvolume
from src.stochastic.config import AmplitudeModel

logger = logging.getLogger(__name__)

MIN_SAMPLES = 1_000
CHUNK_SIZE = 1_000
SIGMA_LIMIT = 5.0
ABS_SLACK = 1e-9
HISTOGRAM_BINS = 20
EMPIRICAL_K_MAX = 4


@dataclass(frozen=True, eq=False)
class DensityRealization:
    amplitudes: np.ndarray
    density: np.ndarray
    # <|a|^2> sum_{i != 0} |f_i(x)|^2 per site
    vacuum_density: np.ndarray
    counts: tuple[float, ...] = ()
    subtracted_counts: tuple[float, ...] = ()

    @property
    def subtracted_density(self) -> np.ndarray:
        return self.density - self.vacuum_density


def _require_complete(basis: BasisSet) -> None:
    if not basis.is_complete:
        raise ValueError(
            f"Sampling needs a complete basis ({basis.n_modes} modes, "
            f"{basis.lattice.n_sites} sites)"
        )


def _check_lattice(basis: BasisSet, v: Subvolume) -> None:
    if v.lattice != basis.lattice:
        raise LatticeMismatchError(
            f"Subvolume lattice ({v.lattice.n_sites} sites) differs from "
            f"basis lattice ({basis.lattice.n_sites} sites)"
        )


def vacuum_density(basis: BasisSet, model: AmplitudeModel) -> np.ndarray:
    return model.second_moment * np.sum(np.abs(basis.modes[1:]) ** 2, axis=0)


def background(basis: BasisSet, model: AmplitudeModel, v: Subvolume) -> float:
    """Expected vacuum power inside v."""
    _check_lattice(basis, v)
    return float(np.sum(vacuum_density(basis, model)[list(v.sites)]))


def expected_density(basis: BasisSet, model: AmplitudeModel) -> np.ndarray:
    """|f_0(x)|^2 + <|a|^2> sum_{i != 0} |f_i(x)|^2."""
    return np.abs(basis.occupied) ** 2 + vacuum_density(basis, model)


def _densities(basis: BasisSet, amplitudes: np.ndarray) -> np.ndarray:
    psi = basis.occupied + amplitudes @ basis.modes[1:]
    return np.abs(psi) ** 2


def sample_realization(
    basis: BasisSet,
    model: AmplitudeModel,
    rng_seed,
    subvolumes: tuple[Subvolume, ...] = (),
) -> DensityRealization:
    """One realization; bit-identical for equal seeds."""
    _require_complete(basis)
    rng = np.random.default_rng(rng_seed)
    amplitudes = model.draw(rng, basis.n_modes - 1)
    density = _densities(basis, amplitudes)
    vacuum = vacuum_density(basis, model)
    counts = []
    subtracted = []
    for v in subvolumes:
        _check_lattice(basis, v)
        sites = list(v.sites)
        counts.append(float(np.sum(density[sites])))
        subtracted.append(counts[-1] - float(np.sum(vacuum[sites])))
    return DensityRealization(amplitudes, density, vacuum, tuple(counts), tuple(subtracted))


@dataclass(frozen=True)
class SampleStatistics:
    """Mean, spread and empirical moments of one scalar across samples."""

    mean: float
    variance: float
    standard_error: float
    moments: tuple[float, ...]
    histogram: tuple[tuple[float, ...], tuple[int, ...]]

    @classmethod
    def of(cls, values: np.ndarray) -> "SampleStatistics":
        n = len(values)
        variance = float(np.var(values, ddof=1)) if n > 1 else 0.0
        counts, edges = np.histogram(values, bins=HISTOGRAM_BINS)
        return cls(
            mean=float(np.mean(values)),
            variance=variance,
            standard_error=float(np.sqrt(variance / n)) if n else 0.0,
            moments=tuple(float(np.mean(values**k)) for k in range(1, EMPIRICAL_K_MAX + 1)),
            histogram=(tuple(float(e) for e in edges), tuple(int(c) for c in counts)),
        )


@dataclass(frozen=True, eq=False)
class EnsembleSummary:
    n_samples: int
    seed: int
    model: AmplitudeModel
    subvolume: tuple[int, ...]
    m: float
    background: float
    mean_density: np.ndarray
    density_standard_error: np.ndarray
    expected_density: np.ndarray
    raw: SampleStatistics
    subtracted: SampleStatistics
    amplitude_second_moment: float
    amplitude_second_moment_se: float
    argmax_counts: np.ndarray
    iprs: np.ndarray

    @property
    def density_deviation(self) -> np.ndarray:
        return np.abs(self.mean_density - self.expected_density)

    @property
    def mean_density_ok(self) -> bool:
        limit = SIGMA_LIMIT * self.density_standard_error + ABS_SLACK
        return bool(np.all(self.density_deviation <= limit))

    @property
    def subtracted_mean_ok(self) -> bool:
        limit = SIGMA_LIMIT * self.subtracted.standard_error + ABS_SLACK
        return abs(self.subtracted.mean - self.m) <= limit

    @property
    def passed(self) -> bool:
        return self.mean_density_ok and self.subtracted_mean_ok


@dataclass(frozen=True, eq=False)
class _Chunk:
    density_sum: np.ndarray
    density_square_sum: np.ndarray
    counts: np.ndarray
    amplitude_power: np.ndarray
    argmax: np.ndarray
    iprs: np.ndarray


def _run_chunk(
    basis: BasisSet, model: AmplitudeModel, sites: list[int], size: int, seed: np.random.SeedSequence,
) -> _Chunk:
    rng = np.random.default_rng(seed)
    amplitudes = model.draw(rng, (size, basis.n_modes - 1))
    densities = _densities(basis, amplitudes)
    totals = densities.sum(axis=1)
    return _Chunk(
        density_sum=densities.sum(axis=0),
        density_square_sum=(densities**2).sum(axis=0),
        counts=densities[:, sites].sum(axis=1),
        amplitude_power=np.mean(np.abs(amplitudes) ** 2, axis=1) if amplitudes.shape[1] else np.zeros(size),
        argmax=np.argmax(densities, axis=1),
        iprs=(densities**2).sum(axis=1) / totals**2,
    )


def ensemble_statistics(
    basis: BasisSet,
    model: AmplitudeModel,
    v: Subvolume,
    n_samples: int,
    seed: int,
    threads: int = 1,
) -> EnsembleSummary:
    """Density and N_v statistics over ``n_samples`` realizations."""
    _require_complete(basis)
    _check_lattice(basis, v)
    if n_samples < MIN_SAMPLES:
        raise ValueError(f"n_samples must be >= {MIN_SAMPLES}, got {n_samples}")

    sizes = [CHUNK_SIZE] * (n_samples // CHUNK_SIZE)
    if n_samples % CHUNK_SIZE:
        sizes.append(n_samples % CHUNK_SIZE)
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    sites = list(v.sites)

    def work(c: int) -> _Chunk:
        return _run_chunk(basis, model, sites, sizes[c], children[c])

    if threads == 1:
        chunks = [work(c) for c in range(len(sizes))]
    else:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            chunks = list(executor.map(work, range(len(sizes))))

    n = n_samples
    density_sum = np.sum([c.density_sum for c in chunks], axis=0)
    density_square_sum = np.sum([c.density_square_sum for c in chunks], axis=0)
    mean_density = density_sum / n
    density_variance = np.maximum(density_square_sum / n - mean_density**2, 0.0) * n / (n - 1)
    counts = np.concatenate([c.counts for c in chunks])
    power = np.concatenate([c.amplitude_power for c in chunks])
    argmax = np.concatenate([c.argmax for c in chunks])

    m = float(np.sum(np.abs(basis.occupied[sites]) ** 2))
    bg = float(np.sum(vacuum_density(basis, model)[sites]))
    summary = EnsembleSummary(
        n_samples=n,
        seed=seed,
        model=model,
        subvolume=v.sites,
        m=m,
        background=bg,
        mean_density=mean_density,
        density_standard_error=np.sqrt(density_variance / n),
        expected_density=expected_density(basis, model),
        raw=SampleStatistics.of(counts),
        subtracted=SampleStatistics.of(counts - bg),
        amplitude_second_moment=float(np.mean(power)),
        amplitude_second_moment_se=float(np.std(power, ddof=1) / np.sqrt(n)),
        argmax_counts=np.bincount(argmax, minlength=basis.lattice.n_sites),
        iprs=np.concatenate([c.iprs for c in chunks]),
    )
    if not summary.passed:
        logger.warning(
            "Mean checks failed (density ok=%s, subtracted ok=%s, seed=%d)",
            summary.mean_density_ok, summary.subtracted_mean_ok, seed,
        )
    return summary

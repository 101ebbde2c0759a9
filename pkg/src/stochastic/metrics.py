"""Localization metrics for realizations and ensembles.

These are exploratory: they are computed and reported, never used as a pass
criterion.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy import stats

from src.model.instance import random_instance
from src.model.lattice import Lattice, Subvolume
from src.stochastic.config import AmplitudeModel
from src.stochastic.engine import (
    MIN_SAMPLES,
    DensityRealization,
    EnsembleSummary,
    ensemble_statistics,
)

logger = logging.getLogger(__name__)

DEFAULT_IPR_SIZES = (8, 16, 32, 64)


@dataclass(frozen=True)
class LocalizationMetrics:
    argmax_site: int
    ipr: float
    top1_fraction: float


@dataclass(frozen=True)
class ArgmaxComparison:
    counts: tuple[int, ...]
    expected: tuple[float, ...]
    chi_square: float
    p_value: float
    mean_ipr: float


@dataclass(frozen=True)
class IprTrend:
    sizes: tuple[int, ...]
    mean_iprs: tuple[float, ...]

    @property
    def monotone_decreasing(self) -> bool:
        return all(b <= a for a, b in zip(self.mean_iprs, self.mean_iprs[1:]))

    @property
    def monotone_increasing(self) -> bool:
        return all(b >= a for a, b in zip(self.mean_iprs, self.mean_iprs[1:]))


def inverse_participation_ratio(density: np.ndarray) -> float:
    total = float(np.sum(density))
    return float(np.sum(density**2) / total**2)


def _realization_metrics(realization: DensityRealization) -> LocalizationMetrics:
    density = realization.density
    site = int(np.argmax(density))
    subtracted = realization.subtracted_density
    mass = float(np.sum(subtracted))
    top1 = float(subtracted[site] / mass) if mass != 0 else float("nan")
    return LocalizationMetrics(site, inverse_participation_ratio(density), top1)


def argmax_chi_square(counts, probabilities) -> tuple[float, float]:
    """Chi-square of an argmax histogram against site probabilities."""
    counts = np.asarray(counts, dtype=float)
    probabilities = np.asarray(probabilities, dtype=float)
    support = probabilities > 0
    if np.any(counts[~support] > 0):
        return float("inf"), 0.0
    observed = counts[support]
    expected = probabilities[support] / probabilities[support].sum() * observed.sum()
    result = stats.chisquare(observed, f_exp=expected)
    return float(result.statistic), float(result.pvalue)


def _ensemble_metrics(summary: EnsembleSummary, occupied_density) -> ArgmaxComparison:
    chi_square, p_value = argmax_chi_square(summary.argmax_counts, occupied_density)
    return ArgmaxComparison(
        counts=tuple(int(c) for c in summary.argmax_counts),
        expected=tuple(float(p) for p in occupied_density),
        chi_square=chi_square,
        p_value=p_value,
        mean_ipr=float(np.mean(summary.iprs)),
    )


def localization_metrics(
    result: DensityRealization | EnsembleSummary,
    occupied_density=None,
) -> LocalizationMetrics | ArgmaxComparison:
    """Per-realization metrics, or the ensemble argmax law against |f_0|^2.

    Ensembles need ``occupied_density`` = |f_0(x)|^2.
    """
    if isinstance(result, DensityRealization):
        return _realization_metrics(result)
    if occupied_density is None:
        raise ValueError("Ensemble metrics need the occupied-mode density |f_0|^2")
    return _ensemble_metrics(result, np.asarray(occupied_density, dtype=float))


def ipr_trend(
    model: AmplitudeModel,
    sizes: tuple[int, ...] = DEFAULT_IPR_SIZES,
    n_samples: int = MIN_SAMPLES,
    seed: int = 0,
) -> IprTrend:
    """Mean inverse participation ratio against lattice size (= mode count)."""
    means = []
    for size in sizes:
        instance = random_instance(size, (seed, size), Subvolume(Lattice(size), (0,)))
        summary = ensemble_statistics(instance.basis, model, instance.subvolume, n_samples, seed)
        means.append(float(np.mean(summary.iprs)))
        logger.debug("IPR at %d modes: %.4g", size, means[-1])
    return IprTrend(tuple(sizes), tuple(means))

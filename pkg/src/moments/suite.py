"""Moment suites: symbolic moments against the Fock-space oracle.

Each trial draws a random f_0 and subvolume from the seed pair
(seed, trial), evaluates the symbolic polynomial <N_v^k>(m) and the oracle
matrix element <0|N_v^k|0>, and records both. Trials are independent and run
on a thread pool; reports come back in trial order.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import ceil

import numpy as np

from src.algebra.moments import MAX_MOMENT, moment_expression
from src.algebra.operators import Statistics
from src.model.basis import drop_mode
from src.model.instance import Instance, random_instance
from src.model.lattice import Lattice, Subvolume, random_subvolume
from src.model.overlap import overlap_matrix
from src.oracle.fock import FockSpace, build_fock, number_operator, vacuum_moments

logger = logging.getLogger(__name__)

BERNOULLI_TOL = 1e-9
AGREEMENT_TOL = 1e-10


@dataclass(frozen=True)
class SuiteConfig:
    stats: Statistics = Statistics.FERMION
    n_sites: int = 10
    k_max: int = 4
    trials: int = 1
    seed: int = 0
    # Fixed subvolume sites; None draws a random one per trial
    subvolume: tuple[int, ...] | None = None
    # Size of the random subvolume; None draws the size as well
    subvolume_size: int | None = None
    # Vacuum row removed from every basis (closure-sensitivity runs)
    drop_mode: int | None = None
    # Boson occupation cutoff; None picks the smallest exact one for k_max
    cutoff: int | None = None
    threads: int = 1

    def __post_init__(self):
        object.__setattr__(self, "stats", Statistics(self.stats))
        if not 1 <= self.k_max <= MAX_MOMENT:
            raise ValueError(f"k_max must be in 1..{MAX_MOMENT}, got {self.k_max}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.threads < 1:
            raise ValueError(f"threads must be >= 1, got {self.threads}")
        if self.subvolume is not None and self.subvolume_size is not None:
            raise ValueError("Give either fixed subvolume sites or a random size, not both")
        # Validates n_sites and the site list
        lattice = Lattice(self.n_sites)
        if self.subvolume is not None:
            Subvolume(lattice, self.subvolume)

    @property
    def boson_cutoff(self) -> int:
        return self.cutoff if self.cutoff is not None else max(1, ceil(self.k_max / 2))


@dataclass(frozen=True)
class MomentRow:
    k: int
    symbolic: float
    oracle: float

    @property
    def difference(self) -> float:
        return abs(self.symbolic - self.oracle)


@dataclass(frozen=True)
class MomentReport:
    trial: int
    seed: tuple[int, ...]
    stats: Statistics
    n_sites: int
    n_modes: int
    subvolume: tuple[int, ...]
    m: float
    rows: tuple[MomentRow, ...] = field(default_factory=tuple)

    def __post_init__(self):
        ks = [row.k for row in self.rows]
        if ks != list(range(1, len(ks) + 1)):
            raise ValueError(f"Moment orders must run 1..k_max, got {ks}")

    @property
    def complete(self) -> bool:
        return self.n_modes == self.n_sites

    @property
    def max_difference(self) -> float:
        return max((row.difference for row in self.rows), default=0.0)

    def agrees(self, tol: float = AGREEMENT_TOL) -> bool:
        return self.max_difference <= tol


@dataclass(frozen=True)
class BernoulliCheck:
    passed: bool
    max_deviation: float


def instance_for_trial(config: SuiteConfig, trial: int) -> Instance:
    lattice = Lattice(config.n_sites)
    subvolume = None
    if config.subvolume is not None:
        subvolume = Subvolume(lattice, config.subvolume)
    instance = random_instance(config.n_sites, (config.seed, trial), subvolume)
    if config.subvolume_size is not None:
        # Same f_0; the subvolume draws from its own stream
        rng = np.random.default_rng([config.seed, trial, 1])
        instance = Instance(
            instance.basis,
            random_subvolume(lattice, rng, config.subvolume_size),
            instance.seed,
        )
    if config.drop_mode is not None:
        instance = Instance(
            drop_mode(instance.basis, config.drop_mode), instance.subvolume, instance.seed,
        )
    return instance


def instance_fock(config: SuiteConfig, instance: Instance) -> FockSpace:
    return build_fock(config.stats, instance.basis.n_modes, config.boson_cutoff)


def _run_trial(config: SuiteConfig, trial: int) -> MomentReport:
    instance = instance_for_trial(config, trial)
    v = overlap_matrix(instance.basis, instance.subvolume)
    fock = instance_fock(config, instance)
    oracle = vacuum_moments(fock, number_operator(fock, v), config.k_max)
    rows = tuple(
        MomentRow(k, moment_expression(k, config.stats).evaluate(v.m), oracle[k - 1])
        for k in range(1, config.k_max + 1)
    )
    logger.debug("trial %d: m=%.6f max diff %.3g", trial, v.m, max(r.difference for r in rows))
    return MomentReport(
        trial=trial,
        seed=instance.seed,
        stats=config.stats,
        n_sites=config.n_sites,
        n_modes=instance.basis.n_modes,
        subvolume=instance.subvolume.sites,
        m=v.m,
        rows=rows,
    )


def run_suite(config: SuiteConfig) -> list[MomentReport]:
    # Warm the symbolic cache once so worker threads only read it
    for k in range(1, config.k_max + 1):
        moment_expression(k, config.stats)
    trials = range(config.trials)
    if config.threads == 1:
        return [_run_trial(config, t) for t in trials]
    with ThreadPoolExecutor(max_workers=config.threads) as executor:
        return list(executor.map(lambda t: _run_trial(config, t), trials))


def run_moment_suite(
    stats: Statistics,
    n_sites: int,
    k_max: int = 4,
    trials: int = 1,
    seed: int = 0,
    **options,
) -> list[MomentReport]:
    """Reports for ``trials`` random instances; deterministic under ``seed``."""
    config = SuiteConfig(
        stats=stats, n_sites=n_sites, k_max=k_max, trials=trials, seed=seed, **options,
    )
    return run_suite(config)


def bernoulli_check(report: MomentReport, tol: float = BERNOULLI_TOL) -> BernoulliCheck:
    """Pass iff every oracle moment equals m, as for a {0, 1}-valued count."""
    if report.stats is not Statistics.FERMION:
        raise ValueError(f"Bernoulli check applies to fermions, got {report.stats.value}")
    deviation = max((abs(row.oracle - report.m) for row in report.rows), default=0.0)
    if deviation >= tol:
        logger.warning(
            "trial %d: moments deviate from m=%.6f by %.3g", report.trial, report.m, deviation,
        )
    return BernoulliCheck(deviation < tol, deviation)

"""Tests for the classical random-amplitude field and its localization metrics."""

import numpy as np
import pytest

from src.model.basis import drop_mode
from src.model.instance import random_instance
from src.model.lattice import Lattice, LatticeMismatchError, Subvolume
from src.stochastic.config import SECOND_MOMENT, AmplitudeKind, AmplitudeModel
from src.stochastic.engine import (
    MIN_SAMPLES,
    SampleStatistics,
    background,
    ensemble_statistics,
    expected_density,
    sample_realization,
    vacuum_density,
)
from src.stochastic.metrics import (
    IprTrend,
    LocalizationMetrics,
    argmax_chi_square,
    inverse_participation_ratio,
    ipr_trend,
    localization_metrics,
)

INSTANCE = random_instance(6, seed=12)


class TestAmplitudeModel:
    def test_gaussian_second_moment(self):
        draws = AmplitudeModel(AmplitudeKind.GAUSSIAN).draw(np.random.default_rng(0), 200_000)
        assert np.mean(np.abs(draws) ** 2) == pytest.approx(SECOND_MOMENT, abs=0.01)

    def test_fixed_phase_modulus(self):
        draws = AmplitudeModel("fixed_phase").draw(np.random.default_rng(0), 100)
        np.testing.assert_allclose(np.abs(draws), np.sqrt(SECOND_MOMENT))

    def test_zero_hook(self):
        model = AmplitudeModel(AmplitudeKind.ZERO)
        assert model.second_moment == 0.0
        assert not np.any(model.draw(np.random.default_rng(0), (3, 4)))

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            AmplitudeModel("uniform")


class TestRealization:
    def test_deterministic_for_equal_seeds(self):
        model = AmplitudeModel()
        a = sample_realization(INSTANCE.basis, model, 5)
        b = sample_realization(INSTANCE.basis, model, 5)
        np.testing.assert_array_equal(a.density, b.density)

    def test_total_power(self):
        r = sample_realization(INSTANCE.basis, AmplitudeModel(), 1)
        assert r.density.sum() == pytest.approx(1 + np.sum(np.abs(r.amplitudes) ** 2))

    def test_zero_amplitudes_leave_occupied_mode(self):
        v = INSTANCE.subvolume
        r = sample_realization(INSTANCE.basis, AmplitudeModel("zero"), 0, subvolumes=(v,))
        np.testing.assert_allclose(r.density, np.abs(INSTANCE.basis.occupied) ** 2)
        assert r.subtracted_counts[0] == pytest.approx(INSTANCE.m)

    def test_counts_per_subvolume(self):
        lattice = INSTANCE.basis.lattice
        vs = (Subvolume(lattice, (0,)), Subvolume.full(lattice))
        r = sample_realization(INSTANCE.basis, AmplitudeModel(), 2, subvolumes=vs)
        assert r.counts[0] == pytest.approx(r.density[0])
        assert r.counts[1] == pytest.approx(r.density.sum())

    def test_needs_complete_basis(self):
        with pytest.raises(ValueError, match="complete basis"):
            sample_realization(drop_mode(INSTANCE.basis, 1), AmplitudeModel(), 0)

    def test_lattice_mismatch(self):
        with pytest.raises(LatticeMismatchError):
            sample_realization(
                INSTANCE.basis, AmplitudeModel(), 0, subvolumes=(Subvolume(Lattice(3), (0,)),)
            )


class TestBackground:
    def test_vacuum_density_by_closure(self):
        expected = SECOND_MOMENT * (1 - np.abs(INSTANCE.basis.occupied) ** 2)
        np.testing.assert_allclose(vacuum_density(INSTANCE.basis, AmplitudeModel()), expected, atol=1e-12)

    def test_background_of_subvolume(self):
        v = INSTANCE.subvolume
        expected = SECOND_MOMENT * (len(v) - INSTANCE.m)
        assert background(INSTANCE.basis, AmplitudeModel(), v) == pytest.approx(expected)

    def test_expected_density_sums_to_total_power(self):
        total = expected_density(INSTANCE.basis, AmplitudeModel()).sum()
        assert total == pytest.approx(1 + SECOND_MOMENT * (INSTANCE.basis.n_modes - 1))


class TestSampleStatistics:
    def test_moments(self):
        stats = SampleStatistics.of(np.array([1.0, 2.0, 3.0, 4.0]))
        assert stats.mean == 2.5
        assert stats.variance == pytest.approx(5 / 3)
        assert stats.moments == pytest.approx((2.5, 7.5, 25.0, 88.5))
        assert sum(stats.histogram[1]) == 4


class TestEnsemble:
    def test_too_few_samples(self):
        with pytest.raises(ValueError, match="n_samples"):
            ensemble_statistics(INSTANCE.basis, AmplitudeModel(), INSTANCE.subvolume, MIN_SAMPLES - 1, 0)

    @pytest.mark.parametrize("kind", ["gaussian", "fixed_phase"])
    def test_mean_laws_hold(self, kind):
        summary = ensemble_statistics(INSTANCE.basis, AmplitudeModel(kind), INSTANCE.subvolume, 20_000, 3)
        assert summary.m == pytest.approx(INSTANCE.m)
        assert summary.passed
        assert summary.amplitude_second_moment == pytest.approx(SECOND_MOMENT, abs=0.01)

    def test_thread_count_does_not_change_summary(self):
        args = (INSTANCE.basis, AmplitudeModel(), INSTANCE.subvolume, 4_500, 8)
        serial = ensemble_statistics(*args)
        threaded = ensemble_statistics(*args, threads=3)
        np.testing.assert_array_equal(serial.mean_density, threaded.mean_density)
        assert serial.raw == threaded.raw

    def test_zero_amplitudes_give_exact_m(self):
        summary = ensemble_statistics(INSTANCE.basis, AmplitudeModel("zero"), INSTANCE.subvolume, 1_000, 0)
        assert summary.background == 0.0
        assert summary.subtracted.mean == pytest.approx(INSTANCE.m)
        assert summary.subtracted.variance == pytest.approx(0.0, abs=1e-20)

    def test_argmax_counts_cover_samples(self):
        summary = ensemble_statistics(INSTANCE.basis, AmplitudeModel(), INSTANCE.subvolume, 2_000, 1)
        assert summary.argmax_counts.sum() == 2_000
        assert len(summary.argmax_counts) == 6


class TestLocalization:
    def test_ipr_limits(self):
        assert inverse_participation_ratio(np.ones(8)) == pytest.approx(1 / 8)
        assert inverse_participation_ratio(np.array([0.0, 3.0, 0.0])) == 1.0

    def test_realization_metrics(self):
        r = sample_realization(INSTANCE.basis, AmplitudeModel(), 4)
        metrics = localization_metrics(r)
        assert isinstance(metrics, LocalizationMetrics)
        assert metrics.argmax_site == int(np.argmax(r.density))
        assert 1 / 6 <= metrics.ipr <= 1

    def test_ensemble_needs_occupied_density(self):
        summary = ensemble_statistics(INSTANCE.basis, AmplitudeModel(), INSTANCE.subvolume, 1_000, 2)
        with pytest.raises(ValueError, match="occupied-mode density"):
            localization_metrics(summary)

    def test_ensemble_argmax_comparison(self):
        summary = ensemble_statistics(INSTANCE.basis, AmplitudeModel(), INSTANCE.subvolume, 1_000, 2)
        comparison = localization_metrics(summary, np.abs(INSTANCE.basis.occupied) ** 2)
        assert sum(comparison.counts) == 1_000
        assert comparison.chi_square >= 0
        assert 0 <= comparison.p_value <= 1

    def test_chi_square_of_exact_proportions(self):
        chi_square, p_value = argmax_chi_square([25, 25, 50], [0.25, 0.25, 0.5])
        assert chi_square == pytest.approx(0.0)
        assert p_value == pytest.approx(1.0)

    def test_chi_square_off_support(self):
        chi_square, p_value = argmax_chi_square([5, 5], [1.0, 0.0])
        assert chi_square == float("inf")
        assert p_value == 0.0

    def test_ipr_trend(self):
        trend = ipr_trend(AmplitudeModel(), sizes=(4, 8), n_samples=1_000, seed=1)
        assert trend.sizes == (4, 8)
        assert all(0 < value <= 1 for value in trend.mean_iprs)

    def test_trend_monotonicity(self):
        assert IprTrend((4, 8, 16), (0.5, 0.3, 0.2)).monotone_decreasing
        assert not IprTrend((4, 8, 16), (0.5, 0.3, 0.4)).monotone_decreasing
        assert IprTrend((4, 8), (0.1, 0.2)).monotone_increasing

"""Tests for moment suites, their reports and the recorded flavor sequences."""

import json
import logging
from pathlib import Path

import pytest

from src.algebra.operators import Statistics
from src.algebra.reduction import M, MPolynomial
from src.moments.golden import (
    GOLDEN_K_MAX,
    GOLDEN_PATH,
    LABELS,
    agreement,
    flavor_sequences,
    golden_document,
    label_moment,
    load_golden,
    write_golden,
)
from src.moments.report import format_table, report_to_document, write_jsonl
from src.moments.suite import (
    MomentReport,
    MomentRow,
    SuiteConfig,
    bernoulli_check,
    run_moment_suite,
    run_suite,
)

GOLDEN_FILE = Path(__file__).resolve().parent.parent / "data" / "golden" / "flavor_moments.json"


class TestSuiteConfig:
    def test_defaults(self):
        config = SuiteConfig()
        assert config.stats is Statistics.FERMION
        assert config.boson_cutoff == 2

    @pytest.mark.parametrize("k_max,cutoff", [(1, 1), (3, 2), (5, 3), (6, 3)])
    def test_boson_cutoff_covers_k_max(self, k_max, cutoff):
        assert SuiteConfig(k_max=k_max).boson_cutoff == cutoff

    def test_explicit_cutoff(self):
        assert SuiteConfig(cutoff=4).boson_cutoff == 4

    def test_k_max_range(self):
        with pytest.raises(ValueError, match="k_max"):
            SuiteConfig(k_max=7)

    def test_subvolume_sites_or_size(self):
        with pytest.raises(ValueError, match="not both"):
            SuiteConfig(subvolume=(0,), subvolume_size=1)

    def test_subvolume_inside_lattice(self):
        with pytest.raises(ValueError, match="outside"):
            SuiteConfig(n_sites=4, subvolume=(4,))

    def test_threads_positive(self):
        with pytest.raises(ValueError, match="threads"):
            SuiteConfig(threads=0)


class TestRunSuite:
    def test_fermion_suite_agrees(self):
        reports = run_moment_suite(Statistics.FERMION, n_sites=6, k_max=4, trials=3, seed=5)
        assert [r.trial for r in reports] == [0, 1, 2]
        for report in reports:
            assert report.complete
            assert report.agrees()
            assert bernoulli_check(report).passed

    @pytest.mark.parametrize("stats,n_sites", [(Statistics.BOSON, 3), (Statistics.COHERENT, 4)])
    def test_bosonic_suites_agree(self, stats, n_sites):
        reports = run_moment_suite(stats, n_sites=n_sites, k_max=4, trials=2, seed=1)
        assert all(r.agrees() for r in reports)

    def test_deterministic(self):
        a = run_moment_suite(Statistics.FERMION, n_sites=5, trials=2, seed=9)
        b = run_moment_suite(Statistics.FERMION, n_sites=5, trials=2, seed=9)
        assert a == b

    def test_thread_count_does_not_change_reports(self):
        serial = run_suite(SuiteConfig(n_sites=5, trials=4, seed=2))
        threaded = run_suite(SuiteConfig(n_sites=5, trials=4, seed=2, threads=3))
        assert serial == threaded

    def test_fixed_subvolume(self):
        reports = run_moment_suite(Statistics.FERMION, n_sites=5, trials=2, subvolume=(0, 1))
        assert all(r.subvolume == (0, 1) for r in reports)

    def test_random_subvolume_size(self):
        reports = run_moment_suite(Statistics.FERMION, n_sites=6, trials=3, subvolume_size=2)
        assert all(len(r.subvolume) == 2 for r in reports)

    def test_full_subvolume_gives_m_one(self):
        reports = run_moment_suite(Statistics.FERMION, n_sites=4, subvolume=(0, 1, 2, 3))
        assert reports[0].m == pytest.approx(1.0)
        assert reports[0].agrees()

    def test_dropped_mode_breaks_agreement(self):
        reports = run_moment_suite(Statistics.FERMION, n_sites=5, k_max=2, seed=3, drop_mode=1)
        report = reports[0]
        assert not report.complete
        assert report.n_modes == 4
        assert report.rows[0].difference < 1e-12
        assert report.rows[1].difference > 1e-8


class TestBernoulliCheck:
    def _report(self, oracle: float, stats=Statistics.FERMION) -> MomentReport:
        return MomentReport(
            trial=0, seed=(0, 0), stats=stats, n_sites=4, n_modes=4, subvolume=(0,), m=0.3,
            rows=(MomentRow(1, 0.3, 0.3), MomentRow(2, 0.3, oracle)),
        )

    def test_pass(self):
        check = bernoulli_check(self._report(0.3))
        assert check.passed
        assert check.max_deviation == 0.0

    def test_fail_logs_warning(self, caplog):
        with caplog.at_level(logging.WARNING):
            check = bernoulli_check(self._report(0.31))
        assert not check.passed
        assert check.max_deviation == pytest.approx(0.01)
        assert "deviate" in caplog.text

    def test_fermions_only(self):
        with pytest.raises(ValueError, match="fermions"):
            bernoulli_check(self._report(0.3, Statistics.BOSON))

    def test_rows_must_start_at_one(self):
        with pytest.raises(ValueError, match="Moment orders"):
            MomentReport(
                trial=0, seed=(), stats=Statistics.FERMION, n_sites=4, n_modes=4,
                subvolume=(), m=0.0, rows=(MomentRow(2, 0.0, 0.0),),
            )


class TestReport:
    def test_document_fields(self):
        report = run_moment_suite(Statistics.FERMION, n_sites=4, k_max=2, seed=1)[0]
        doc = report_to_document(report)
        assert doc.stats == "fermion"
        assert doc.seed == [1, 0]
        assert doc.complete
        assert [row.k for row in doc.rows] == [1, 2]

    def test_write_jsonl_with_header(self, tmp_path):
        reports = run_moment_suite(Statistics.FERMION, n_sites=4, trials=2, seed=1)
        path = write_jsonl(reports, tmp_path / "out" / "moments.jsonl", header={"header": {"seed": 1}})
        lines = path.read_text().splitlines()
        assert len(lines) == 3
        assert json.loads(lines[0]) == {"header": {"seed": 1}}
        assert json.loads(lines[2])["trial"] == 1

    def test_format_table(self):
        reports = run_moment_suite(Statistics.FERMION, n_sites=4, k_max=3, trials=2, seed=1)
        text = format_table(reports)
        assert "MOMENT SUITE: fermion, 4 sites, 2 trials" in text
        assert "symbolic" in text
        # header block, column names, six rows, footer
        assert len(text.splitlines()) == 3 + 1 + 6 + 3

    def test_format_table_empty(self):
        assert format_table([]) == "No reports."


class TestFlavorGolden:
    def test_label_moments(self):
        assert label_moment("bernoulli", 3) == MPolynomial.from_expr(M)
        assert label_moment("poisson", 2) == MPolynomial.from_expr(M + M**2)
        assert label_moment("bose-einstein", 2) == MPolynomial.from_expr(M + 2 * M**2)

    def test_unknown_label(self):
        with pytest.raises(ValueError, match="Unknown"):
            label_moment("binomial", 1)

    def test_sequences_cover_every_flavor(self):
        sequences = flavor_sequences()
        assert set(sequences) == set(Statistics)
        assert all(len(s) == GOLDEN_K_MAX for s in sequences.values())

    def test_fermions_agree_with_bernoulli(self):
        result = agreement(Statistics.FERMION, flavor_sequences()[Statistics.FERMION])
        assert result.label == LABELS[Statistics.FERMION]
        assert result.agrees_up_to == GOLDEN_K_MAX
        assert result.first_difference is None

    @pytest.mark.parametrize("stats", [Statistics.BOSON, Statistics.COHERENT])
    def test_bosonic_flavors_depart_at_second_moment(self, stats):
        result = agreement(stats, flavor_sequences()[stats])
        assert result.agrees_up_to == 1
        assert result.first_difference == 2

    def test_matches_committed_file(self):
        assert load_golden(GOLDEN_FILE) == golden_document()

    def test_default_path_is_the_committed_file(self):
        assert GOLDEN_PATH == GOLDEN_FILE
        assert load_golden() == golden_document()

    def test_write_and_load(self, tmp_path):
        path = write_golden(tmp_path / "golden.json")
        assert load_golden(path) == golden_document()

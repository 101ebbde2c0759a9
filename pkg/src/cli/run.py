"""CLI entrypoint: run one verification experiment and report the outcome.

Usage:
    python -m src.cli.run moments --stats fermion --sites 10 --kmax 4 --trials 20 --seed 7
    python -m src.cli.run table1
    python -m src.cli.run spectrum --sites 8 --subvolume 0-3
    python -m src.cli.run measure --observable random --seed 3
    python -m src.cli.run mc --samples 100000 --amplitudes fixed_phase --seed 11
    python -m src.cli.run golden

Exit codes: 0 all checks passed, 1 a check failed, 2 usage error.
The first output line echoes every parameter plus a timestamp; the rest of
the output is identical across reruns with the same flags.
"""

import argparse
import csv
import io
import json
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from src.algebra.moments import compare_with_reference, table1_report
from src.algebra.operators import Statistics
from src.algebra.schemas import polynomial_to_document
from src.cli.config import COMMANDS, RunConfig
from src.measurement.filtering import (
    filter_coefficients,
    outcome_table,
    position_observable,
    random_observable,
)
from src.model.overlap import overlap_matrix
from src.moments.golden import GOLDEN_PATH, golden_document, load_golden, write_golden
from src.moments.report import format_table, report_lines
from src.moments.suite import (
    AGREEMENT_TOL,
    BERNOULLI_TOL,
    SuiteConfig,
    bernoulli_check,
    instance_for_trial,
    instance_fock,
    run_suite,
)
from src.oracle.fock import DimensionBudgetError, number_operator
from src.oracle.spectrum import matches_bernoulli, spectral_distribution
from src.stochastic.config import AmplitudeModel
from src.stochastic.engine import ensemble_statistics
from src.stochastic.metrics import ipr_trend, localization_metrics

logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

PROBABILITY_TOL = 1e-12


def _suite_config(config: RunConfig) -> SuiteConfig:
    return SuiteConfig(
        stats=config.stats,
        n_sites=config.n_sites,
        k_max=config.k_max,
        trials=config.trials,
        seed=config.master_seed,
        subvolume=config.fixed_sites,
        subvolume_size=config.random_size,
        drop_mode=config.drop_mode,
        cutoff=config.cutoff,
        threads=config.threads,
    )


def _csv_lines(fieldnames: list[str], rows: list[dict]) -> list[str]:
    """CSV text lines; floats keep full precision."""
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=fieldnames, lineterminator="\n")
    writer.writeheader()
    writer.writerows(
        {k: repr(v) if isinstance(v, float) else v for k, v in row.items()} for row in rows
    )
    return buffer.getvalue().rstrip("\n").split("\n")


def _header_line(config: RunConfig) -> str:
    header = {
        **config.header(),
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    text = json.dumps({"header": header}, sort_keys=True)
    return text if config.format == "json" else f"# {text}"


def cmd_moments(config: RunConfig) -> tuple[list[str], bool]:
    reports = run_suite(_suite_config(config))
    agreed = all(r.agrees(AGREEMENT_TOL) for r in reports)
    checks = [bernoulli_check(r) for r in reports] if config.stats is Statistics.FERMION else []
    passed = agreed and all(c.passed for c in checks)

    if config.format == "json":
        return report_lines(reports), passed
    if config.format == "csv":
        rows = [
            {
                "trial": r.trial, "m": r.m, "k": row.k,
                "symbolic": row.symbolic, "oracle": row.oracle, "difference": row.difference,
            }
            for r in reports for row in r.rows
        ]
        return _csv_lines(["trial", "m", "k", "symbolic", "oracle", "difference"], rows), passed

    lines = format_table(reports).split("\n")
    lines.append(f"  Symbolic/oracle agreement (tol {AGREEMENT_TOL:g}): {'PASS' if agreed else 'FAIL'}")
    if checks:
        worst = max(c.max_deviation for c in checks)
        lines.append(
            f"  Bernoulli law (tol {BERNOULLI_TOL:g}): "
            f"{sum(c.passed for c in checks)}/{len(checks)} pass, max deviation {worst:.3e}"
        )
    return lines, passed


def cmd_table1(config: RunConfig) -> tuple[list[str], bool]:
    rows = table1_report()
    errors = compare_with_reference(rows)
    passed = not errors

    if config.format == "json":
        lines = [
            json.dumps({
                "pattern": row.pattern,
                "count": row.term_count,
                "coeffs": polynomial_to_document(row.polynomial).model_dump(mode="json")["coeffs"],
            }, sort_keys=True)
            for row in rows
        ]
        return lines, passed

    table = [
        {
            "pattern": row.pattern,
            "count": row.term_count,
            **{f"m{p}": str(row.polynomial.coefficient(p)) for p in range(1, 5)},
        }
        for row in rows
    ]
    if config.format == "csv":
        return _csv_lines(["pattern", "count", "m1", "m2", "m3", "m4"], table), passed

    width = max(len(r["pattern"]) for r in table)
    lines = [
        f"{'=' * 60}",
        "FERMION FOURTH MOMENT BY TERM CLASS",
        f"{'=' * 60}",
        f"{'terms like'.ljust(width)}  count     m    m2    m3    m4",
    ]
    for r in table:
        lines.append(
            f"{r['pattern'].ljust(width)}  {r['count']:>5}"
            + "".join(f"{r[f'm{p}']:>6}" for p in range(1, 5))
        )
    lines.append("")
    lines.append(f"  Matches reference table: {'YES' if passed else 'NO'}")
    lines += [f"  - {e}" for e in errors]
    return lines, passed


def cmd_spectrum(config: RunConfig) -> tuple[list[str], bool]:
    suite = _suite_config(config)
    rows = []
    deviations = []
    for trial in range(config.trials):
        instance = instance_for_trial(suite, trial)
        v = overlap_matrix(instance.basis, instance.subvolume)
        fock = instance_fock(suite, instance)
        dist = spectral_distribution(fock, number_operator(fock, v))
        if config.stats is Statistics.FERMION:
            deviations.append(matches_bernoulli(dist, v.m))
        for eigenvalue, weight in dist.atoms:
            rows.append({
                "trial": trial, "m": v.m, "eigenvalue": eigenvalue, "weight": weight,
            })
    passed = all(ok for ok, _ in deviations)

    if config.format == "json":
        return [json.dumps(row, sort_keys=True) for row in rows], passed
    if config.format == "csv":
        return _csv_lines(["trial", "m", "eigenvalue", "weight"], rows), passed

    lines = [
        f"{'=' * 60}",
        f"VACUUM DISTRIBUTION OF N_v: {config.stats.value}, {config.n_sites} sites",
        f"{'=' * 60}",
        f"{'trial':>5}  {'m':>10}  {'eigenvalue':>12}  {'weight':>10}",
    ]
    for row in rows:
        lines.append(
            f"{row['trial']:>5}  {row['m']:>10.6g}  "
            f"{row['eigenvalue']:>12.6g}  {row['weight']:>10.6g}"
        )
    if deviations:
        worst = max(d for _, d in deviations)
        lines.append("")
        lines.append(
            f"  Two atoms (0, 1-m), (1, m): {'PASS' if passed else 'FAIL'} "
            f"(max deviation {worst:.3e})"
        )
    return lines, passed


def cmd_measure(config: RunConfig) -> tuple[list[str], bool]:
    suite = _suite_config(config)
    instance = instance_for_trial(suite, 0)
    lattice = instance.basis.lattice
    if config.observable == "random":
        obs = random_observable(lattice, config.master_seed)
    else:
        obs = position_observable(lattice)
    fc = filter_coefficients(instance.basis, obs)
    cutoff = suite.boson_cutoff
    rows = outcome_table(fc, config.k_max, config.stats, cutoff)

    total = sum(row["probability"] for row in rows)
    norm_residual = fc.column_norm_residual()
    passed = abs(total - 1.0) <= PROBABILITY_TOL and norm_residual <= PROBABILITY_TOL
    if config.stats is Statistics.FERMION:
        spread = max(
            abs(row[f"moment_{k}"] - row["probability"])
            for row in rows for k in range(1, config.k_max + 1)
        )
        passed = passed and spread <= AGREEMENT_TOL
    fields = ["n", "eigenvalue", "probability"] + [f"moment_{k}" for k in range(1, config.k_max + 1)]

    if config.format == "json":
        return [json.dumps(row, sort_keys=True) for row in rows], passed
    if config.format == "csv":
        return _csv_lines(fields, rows), passed

    lines = [
        f"{'=' * 60}",
        f"FILTERED MEASUREMENT: {config.observable} observable, {config.stats.value}",
        f"{'=' * 60}",
        "  ".join(f"{f:>12}" for f in fields),
    ]
    for row in rows:
        lines.append("  ".join(
            f"{row[f]:>12}" if f == "n" else f"{row[f]:>12.6g}" for f in fields
        ))
    lines += [
        "",
        f"  Sum of probabilities: {total:.12f}",
        f"  Column normalization residual: {norm_residual:.3e}",
        f"  Checks: {'PASS' if passed else 'FAIL'}",
    ]
    return lines, passed


def cmd_mc(config: RunConfig) -> tuple[list[str], bool]:
    suite = _suite_config(config)
    instance = instance_for_trial(suite, 0)
    model = AmplitudeModel(config.amplitudes)
    summary = ensemble_statistics(
        instance.basis, model, instance.subvolume, config.samples, config.seed, config.threads,
    )
    occupied_density = np.abs(instance.basis.occupied) ** 2
    argmax = localization_metrics(summary, occupied_density)
    z = summary.density_deviation / np.maximum(summary.density_standard_error, 1e-300)
    passed = summary.passed

    document = {
        "seed": summary.seed,
        "n_samples": summary.n_samples,
        "amplitudes": model.kind.value,
        "subvolume": list(summary.subvolume),
        "m": summary.m,
        "background": summary.background,
        "raw_mean": summary.raw.mean,
        "raw_standard_error": summary.raw.standard_error,
        "raw_variance": summary.raw.variance,
        "raw_moments": list(summary.raw.moments),
        "subtracted_mean": summary.subtracted.mean,
        "subtracted_standard_error": summary.subtracted.standard_error,
        "subtracted_variance": summary.subtracted.variance,
        "subtracted_moments": list(summary.subtracted.moments),
        "subtracted_histogram": {
            "edges": list(summary.subtracted.histogram[0]),
            "counts": list(summary.subtracted.histogram[1]),
        },
        "amplitude_second_moment": summary.amplitude_second_moment,
        "mean_density_ok": summary.mean_density_ok,
        "subtracted_mean_ok": summary.subtracted_mean_ok,
        "argmax_counts": list(argmax.counts),
        "argmax_chi_square": argmax.chi_square,
        "argmax_p_value": argmax.p_value,
        "mean_ipr": argmax.mean_ipr,
    }
    trend = ipr_trend(model, seed=config.master_seed) if config.ipr_trend else None
    if trend is not None:
        document["ipr_trend"] = {
            "sizes": list(trend.sizes),
            "mean_iprs": list(trend.mean_iprs),
            "monotone_decreasing": trend.monotone_decreasing,
        }

    if config.format == "json":
        return [json.dumps(document, sort_keys=True)], passed
    if config.format == "csv":
        rows = [
            {
                "site": x,
                "mean_density": float(summary.mean_density[x]),
                "expected_density": float(summary.expected_density[x]),
                "standard_error": float(summary.density_standard_error[x]),
                "argmax_count": int(summary.argmax_counts[x]),
            }
            for x in range(config.n_sites)
        ]
        fields = ["site", "mean_density", "expected_density", "standard_error", "argmax_count"]
        return _csv_lines(fields, rows), passed

    lines = [
        f"{'=' * 60}",
        f"CLASSICAL FIELD ENSEMBLE: {model.kind.value}, {summary.n_samples} samples",
        f"{'=' * 60}",
        f"  Subvolume:            {list(summary.subvolume)}",
        f"  m:                    {summary.m:.6g}",
        f"  Background:           {summary.background:.6g}",
        f"  Raw N_v:              {summary.raw.mean:.6g} +/- {summary.raw.standard_error:.2g}",
        f"  Subtracted N_v:       {summary.subtracted.mean:.6g} +/- {summary.subtracted.standard_error:.2g}",
        f"  <|a|^2>:              {summary.amplitude_second_moment:.6g}",
        f"  Max density |z|:      {float(np.max(z)):.3g}",
        f"  Argmax chi-square:    {argmax.chi_square:.6g} (p={argmax.p_value:.4f})",
        f"  Mean IPR:             {argmax.mean_ipr:.6g}",
        "",
        f"  Mean density law:     {'PASS' if summary.mean_density_ok else 'FAIL'}",
        f"  Subtracted mean law:  {'PASS' if summary.subtracted_mean_ok else 'FAIL'}",
    ]
    if trend is not None:
        lines.append("")
        lines.append("  IPR against mode count (exploratory):")
        for size, value in zip(trend.sizes, trend.mean_iprs):
            lines.append(f"    {size:>4} modes: {value:.6g}")
        lines.append(f"    Monotone decreasing: {'YES' if trend.monotone_decreasing else 'NO'}")
    lines.append(f"{'=' * 60}")
    return lines, passed


def cmd_golden(config: RunConfig) -> tuple[list[str], bool]:
    document = golden_document()
    if config.out is not None:
        path = write_golden(config.out)
        return [f"Wrote {path}"], True
    recorded = load_golden(GOLDEN_PATH)
    passed = recorded == document
    lines = [json.dumps(document.model_dump(mode="json"), sort_keys=True)]
    if config.format != "json":
        lines = [
            f"{stats}: agrees with {a.label} up to k={a.agrees_up_to}"
            for stats, a in document.agreement.items()
        ]
        lines.append(f"Matches recorded {GOLDEN_PATH.name}: {'YES' if passed else 'NO'}")
    return lines, passed


_COMMANDS = {
    "moments": cmd_moments,
    "table1": cmd_table1,
    "spectrum": cmd_spectrum,
    "measure": cmd_measure,
    "mc": cmd_mc,
    "golden": cmd_golden,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Vacuum corpuscle verification suite")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--stats", default="fermion", help="fermion, boson or coherent")
    parser.add_argument("--sites", dest="n_sites", type=int, default=10)
    parser.add_argument("--subvolume", default="random")
    parser.add_argument("--kmax", dest="k_max", type=int, default=4)
    parser.add_argument("--trials", type=int, default=1)
    parser.add_argument("--samples", type=int, default=100_000)
    parser.add_argument("--amplitudes", default="gaussian", help="gaussian, fixed_phase or zero")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--format", default="table", help="json, csv or table")
    parser.add_argument("--out", default=None, help="Output path (default stdout)")
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--cutoff", type=int, default=None, help="Boson occupation cutoff")
    parser.add_argument("--drop-mode", dest="drop_mode", type=int, default=None)
    parser.add_argument("--observable", default="position", help="position or random")
    parser.add_argument(
        "--ipr-trend", dest="ipr_trend", action="store_true",
        help="Also report mean IPR against mode count (mc only)",
    )
    parser.add_argument("--verbose", action="store_true")
    return parser


def _emit(config: RunConfig, lines: list[str]) -> None:
    text = "\n".join([_header_line(config)] + lines) + "\n"
    if config.out is None or config.command == "golden":
        sys.stdout.write(text)
        return
    path = Path(config.out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def main(args: list[str] | None = None) -> int:
    opts = build_parser().parse_args(args)
    try:
        config = RunConfig(**vars(opts))
    except ValidationError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    logging.basicConfig(
        level=logging.INFO if config.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        lines, passed = _COMMANDS[config.command](config)
    except (DimensionBudgetError, FileNotFoundError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    _emit(config, lines)
    logger.info("%s finished: %s", config.command, "pass" if passed else "fail")
    return EXIT_PASS if passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())

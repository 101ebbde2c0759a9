"""Text and JSON-lines renderings of moment reports."""

import json
from pathlib import Path

from pydantic import BaseModel, Field

from src.moments.suite import MomentReport


class MomentRowDocument(BaseModel):
    k: int = Field(..., ge=1)
    symbolic: float
    oracle: float
    difference: float = Field(..., ge=0)


class MomentReportDocument(BaseModel):
    trial: int = Field(..., ge=0)
    seed: list[int]
    stats: str
    n_sites: int = Field(..., ge=2)
    n_modes: int = Field(..., ge=1)
    subvolume: list[int]
    m: float
    complete: bool
    rows: list[MomentRowDocument]


def report_to_document(report: MomentReport) -> MomentReportDocument:
    return MomentReportDocument(
        trial=report.trial,
        seed=list(report.seed),
        stats=report.stats.value,
        n_sites=report.n_sites,
        n_modes=report.n_modes,
        subvolume=list(report.subvolume),
        m=report.m,
        complete=report.complete,
        rows=[
            MomentRowDocument(k=r.k, symbolic=r.symbolic, oracle=r.oracle, difference=r.difference)
            for r in report.rows
        ],
    )


def report_lines(reports: list[MomentReport]) -> list[str]:
    return [report_to_document(r).model_dump_json() for r in reports]


def write_jsonl(reports: list[MomentReport], path: str | Path, header: dict | None = None) -> Path:
    """One JSON document per report, optionally preceded by a header document."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = report_lines(reports)
    if header is not None:
        lines.insert(0, json.dumps(header, sort_keys=True))
    path.write_text("\n".join(lines) + "\n")
    return path


def _g(value: float) -> str:
    return f"{value:.6g}"


def format_table(reports: list[MomentReport]) -> str:
    """Aligned text table, one line per (trial, k)."""
    if not reports:
        return "No reports."
    columns = ("trial", "|v|", "m", "k", "symbolic", "oracle", "|diff|")
    body = []
    for report in reports:
        for row in report.rows:
            body.append((
                str(report.trial),
                str(len(report.subvolume)),
                _g(report.m),
                str(row.k),
                _g(row.symbolic),
                _g(row.oracle),
                f"{row.difference:.2e}",
            ))
    widths = [max(len(c), *(len(line[i]) for line in body)) for i, c in enumerate(columns)]
    stats = reports[0].stats.value
    worst = max(r.max_difference for r in reports)
    lines = [
        f"{'=' * 60}",
        f"MOMENT SUITE: {stats}, {reports[0].n_sites} sites, {len(reports)} trials",
        f"{'=' * 60}",
        "  ".join(c.rjust(w) for c, w in zip(columns, widths)),
    ]
    lines += ["  ".join(v.rjust(w) for v, w in zip(line, widths)) for line in body]
    lines += [
        "",
        f"  Max |symbolic - oracle|: {worst:.2e}",
        f"{'=' * 60}",
    ]
    return "\n".join(lines)

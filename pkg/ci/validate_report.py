"""CI validation: verify an exported moment suite is complete and sane.

This script is the final gate in CI. It reads the JSON-lines output of
``python -m src.cli.run moments --format json`` and checks structural and
numerical invariants. If anything is wrong, it exits non-zero and fails the
build.

Usage:
    python ci/validate_report.py
    python ci/validate_report.py --data data/moments.jsonl
"""

import argparse
import json
import math
import sys
from pathlib import Path

REQUIRED_FIELDS = {"trial", "seed", "stats", "n_sites", "n_modes", "subvolume", "m", "complete", "rows"}
ROW_FIELDS = {"k", "symbolic", "oracle", "difference"}
STATS = ("fermion", "boson", "coherent")
AGREEMENT_TOL = 1e-10
BERNOULLI_TOL = 1e-9
M_SLACK = 1e-12


def load_records(text: str) -> list[dict]:
    """Parse JSON lines, skipping blank lines and the header document."""
    records = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        record = json.loads(line)
        if "header" in record:
            continue
        records.append(record)
    return records


def _validate_record(record: dict) -> list[str]:
    errors = []
    trial = record.get("trial", "UNKNOWN")

    missing = REQUIRED_FIELDS - set(record.keys())
    if missing:
        return [f"Trial {trial} missing fields: {sorted(missing)}"]

    if record["stats"] not in STATS:
        errors.append(f"Trial {trial} has unknown statistics {record['stats']!r}")

    m = record["m"]
    if not -M_SLACK <= m <= 1 + M_SLACK:
        errors.append(f"Trial {trial} m out of range: {m}")

    rows = record["rows"]
    if not rows:
        errors.append(f"Trial {trial} has no moment rows")
        return errors

    ks = [row.get("k") for row in rows]
    if ks != list(range(1, len(rows) + 1)):
        errors.append(f"Trial {trial} moment orders {ks} are not contiguous from 1")

    for row in rows:
        row_missing = ROW_FIELDS - set(row.keys())
        if row_missing:
            errors.append(f"Trial {trial} row missing fields: {sorted(row_missing)}")
            continue
        k = row["k"]
        values = (row["symbolic"], row["oracle"], row["difference"])
        if not all(math.isfinite(x) for x in values):
            errors.append(f"Trial {trial} k={k} has non-finite values")
            continue
        if abs(abs(row["symbolic"] - row["oracle"]) - row["difference"]) > 1e-15:
            errors.append(f"Trial {trial} k={k} difference does not match its values")

        if not record["complete"]:
            continue
        if row["difference"] > AGREEMENT_TOL:
            errors.append(
                f"Trial {trial} k={k} symbolic/oracle disagree by {row['difference']:.3e}"
            )
        if record["stats"] == "fermion" and abs(row["oracle"] - m) > BERNOULLI_TOL:
            errors.append(
                f"Trial {trial} k={k} fermion moment {row['oracle']:.12f} != m={m:.12f}"
            )
    return errors


def validate(records: list[dict]) -> list[str]:
    """Return a list of validation errors (empty = pass)."""
    if not records:
        return ["No moment reports found"]

    errors = []
    trials = [r.get("trial") for r in records]
    if len(set(trials)) != len(trials):
        errors.append(f"Duplicate trial indices: {trials}")

    flavors = {r.get("stats") for r in records}
    if len(flavors) > 1:
        errors.append(f"Mixed statistics in one suite: {sorted(map(str, flavors))}")

    for record in records:
        errors.extend(_validate_record(record))
    return errors


def main() -> None:
    parser = argparse.ArgumentParser(description="Validate an exported moment suite")
    parser.add_argument(
        "--data",
        default="data/moments.jsonl",
        help="Path to the JSON-lines moment report",
    )
    opts = parser.parse_args()

    path = Path(opts.data)
    if not path.exists():
        print(
            f"FAIL: {opts.data} not found. Run "
            f"'python -m src.cli.run moments --format json --out {opts.data}' first."
        )
        sys.exit(1)

    records = load_records(path.read_text())
    errors = validate(records)

    if errors:
        print(f"FAIL: {len(errors)} validation error(s):")
        for e in errors:
            print(f"  - {e}")
        sys.exit(1)

    worst = max(row["difference"] for r in records for row in r["rows"])
    print("PASS: Moment suite validated")
    print(f"  Statistics: {records[0]['stats']}")
    print(f"  Trials:     {len(records)}")
    print(f"  Max |symbolic - oracle|: {worst:.3e}")


if __name__ == "__main__":
    main()

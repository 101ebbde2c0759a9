"""Recorded moment sequences per statistics flavor.

Fermion moments are compared with a Bernoulli count (every moment m), boson
moments with the Bose-Einstein (geometric) count of mean m and coherent
moments with the Poisson count of mean m. The comparison is recorded as the
highest order up to which the sequences agree.
"""

import math
from pathlib import Path

import sympy
from pydantic import BaseModel, Field
from sympy.functions.combinatorial.numbers import stirling

from src.algebra.moments import MAX_MOMENT, moment_expression
from src.algebra.operators import Statistics
from src.algebra.reduction import M, MPolynomial

GOLDEN_PATH = Path(__file__).resolve().parents[2] / "data" / "golden" / "flavor_moments.json"
GOLDEN_K_MAX = 3

LABELS = {
    Statistics.FERMION: "bernoulli",
    Statistics.BOSON: "bose-einstein",
    Statistics.COHERENT: "poisson",
}


def label_moment(label: str, k: int) -> MPolynomial:
    """k-th raw moment of the labelled count distribution with mean m."""
    if label == "bernoulli":
        return MPolynomial.from_expr(M)
    if label == "poisson":
        # Touchard polynomial: sum_j S(k, j) m^j
        return MPolynomial.from_expr(sum(stirling(k, j) * M**j for j in range(1, k + 1)))
    if label == "bose-einstein":
        # factorial moments of the geometric law are j! m^j
        return MPolynomial.from_expr(
            sum(stirling(k, j) * math.factorial(j) * M**j for j in range(1, k + 1))
        )
    raise ValueError(f"Unknown distribution label {label!r}")


class Agreement(BaseModel):
    label: str
    agrees_up_to: int = Field(..., ge=0)
    first_difference: int | None = None


class GoldenDocument(BaseModel):
    k_max: int = Field(..., ge=1, le=MAX_MOMENT)
    sequences: dict[str, list[dict[int, tuple[int, int]]]]
    agreement: dict[str, Agreement]


def flavor_sequences(k_max: int = GOLDEN_K_MAX) -> dict[Statistics, list[MPolynomial]]:
    return {
        stats: [moment_expression(k, stats) for k in range(1, k_max + 1)]
        for stats in Statistics
    }


def agreement(stats: Statistics, sequence: list[MPolynomial]) -> Agreement:
    label = LABELS[stats]
    for k, polynomial in enumerate(sequence, start=1):
        if polynomial != label_moment(label, k):
            return Agreement(label=label, agrees_up_to=k - 1, first_difference=k)
    return Agreement(label=label, agrees_up_to=len(sequence))


def _coefficients(polynomial: MPolynomial) -> dict[int, tuple[int, int]]:
    return {
        power: (int(sympy.Rational(value).p), int(sympy.Rational(value).q))
        for power, value in polynomial.coeffs
    }


def golden_document(k_max: int = GOLDEN_K_MAX) -> GoldenDocument:
    sequences = flavor_sequences(k_max)
    return GoldenDocument(
        k_max=k_max,
        sequences={
            stats.value: [_coefficients(p) for p in polys] for stats, polys in sequences.items()
        },
        agreement={stats.value: agreement(stats, polys) for stats, polys in sequences.items()},
    )


def write_golden(path: str | Path = GOLDEN_PATH, k_max: int = GOLDEN_K_MAX) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(golden_document(k_max).model_dump_json(indent=2) + "\n")
    return path


def load_golden(path: str | Path = GOLDEN_PATH) -> GoldenDocument:
    return GoldenDocument.model_validate_json(Path(path).read_text())

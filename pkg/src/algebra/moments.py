"""Symbolic vacuum moments of the subvolume count N_v.

With O_0 = b_0† and O_i = b_i for the vacuum modes,

    N_v = sum_pq V_pq O_p† O_q

splits into four factor kinds by which of p, q is the occupied mode:

    D  (0, 0)  b_0 b_0†
    X  (0, j)  b_0 b_j      exit from the occupied mode
    E  (i, 0)  b_i† b_0†    entry back into it
    H  (i, j)  b_i† b_j     hop between vacuum modes

N_v^k is the sum over all 4^k words of these kinds. Each word is one term
class: its vacuum expectation is reduced to an exact polynomial in m and
the moment is the sum over words.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from itertools import product

import sympy

from src.algebra.operators import OCCUPIED, B, Bd, Expression, ModeIndex, Statistics, Term
from src.algebra.ordering import vacuum_expectation
from src.algebra.reduction import M, MPolynomial, reduce_to_m_polynomial

logger = logging.getLogger(__name__)

MAX_MOMENT = 6


class UnsupportedMomentError(ValueError):
    """Raised for moment orders outside 1..MAX_MOMENT."""


class FactorKind(str, Enum):
    DIAGONAL = "D"
    EXIT = "X"
    ENTRY = "E"
    HOP = "H"

    @property
    def occupied_row(self) -> bool:
        return self in (FactorKind.DIAGONAL, FactorKind.EXIT)

    @property
    def occupied_column(self) -> bool:
        return self in (FactorKind.DIAGONAL, FactorKind.ENTRY)


@dataclass(frozen=True)
class MomentTerm:
    word: str
    expectation: Expression
    polynomial: MPolynomial


@dataclass(frozen=True)
class Table1Row:
    pattern: str
    term_count: int
    polynomial: MPolynomial


# Published bookkeeping of the fermion fourth moment: coefficients of m..m^4
REFERENCE_FOURTH_MOMENT_TABLE: tuple[tuple[str, int, tuple[int, int, int, int]], ...] = (
    ("b_n b_n† b_n b_n† b_n b_n† b_n b_n†", 1, (0, 0, 0, 1)),
    ("b_n b_i b_i† b_n† b_n b_n† b_n b_n†", 3, (0, 0, 3, -3)),
    ("b_n b_i b_i† b_j b_j† b_n† b_n b_n†", 2, (0, 2, -4, 2)),
    ("b_n b_i b_i† b_n† b_n b_j b_j† b_n†", 1, (0, 1, -2, 1)),
    ("b_n b_i b_i† b_j b_j† b_k b_k† b_n†", 1, (1, -3, 3, -1)),
    ("Total", 8, (1, 0, 0, 0)),
)


def _check_order(k: int) -> None:
    if not 1 <= k <= MAX_MOMENT:
        raise UnsupportedMomentError(f"Moment order must be in 1..{MAX_MOMENT}, got {k}")


def word_term(word: str) -> Term:
    """Operator term of one word of factor kinds, e.g. "XHE"."""
    overlaps = []
    operators = []
    sums = []
    for t, letter in enumerate(word, start=1):
        kind = FactorKind(letter)
        row = OCCUPIED if kind.occupied_row else ModeIndex.symbolic(f"p{t}")
        column = OCCUPIED if kind.occupied_column else ModeIndex.symbolic(f"q{t}")
        overlaps.append((row, column))
        # O_p† is b_0 for the occupied mode, b_p† otherwise
        operators.append(B(row) if kind.occupied_row else Bd(row))
        operators.append(Bd(column) if kind.occupied_column else B(column))
        sums += [i for i in (row, column) if i.is_symbolic]
    return Term(overlaps=tuple(overlaps), operators=tuple(operators), sums=tuple(sums))


def _may_survive(word: str) -> bool:
    # <0| b_i† = 0 on the left and b_j |0> = 0 on the right
    return word[0] in "DX" and word[-1] in "DE"


def moment_terms(k: int, stats: Statistics) -> list[MomentTerm]:
    """Words of N_v^k with a nonzero vacuum expectation."""
    _check_order(k)
    stats = Statistics(stats)
    terms = []
    for letters in product("DXEH", repeat=k):
        word = "".join(letters)
        if not _may_survive(word):
            continue
        expectation = vacuum_expectation(word_term(word), stats)
        polynomial = reduce_to_m_polynomial(expectation)
        if polynomial.coeffs:
            terms.append(MomentTerm(word, expectation, polynomial))
    logger.debug("k=%d %s: %d surviving words", k, stats.value, len(terms))
    return terms


@lru_cache(maxsize=None)
def moment_expression(k: int, stats: Statistics) -> MPolynomial:
    """<N_v^k> as an exact polynomial in m over a complete basis."""
    total = MPolynomial()
    for term in moment_terms(k, stats):
        total = total + term.polynomial
    return total


def excursion_lengths(word: str) -> tuple[int, ...]:
    """Lengths of the X H* E runs of a word, in order of appearance."""
    lengths = []
    current = 0
    for letter in word:
        kind = FactorKind(letter)
        if kind is FactorKind.EXIT:
            if current:
                raise ValueError(f"Nested exit in {word!r}")
            current = 1
        elif kind is FactorKind.HOP:
            if not current:
                raise ValueError(f"Hop outside an excursion in {word!r}")
            current += 1
        elif kind is FactorKind.ENTRY:
            if not current:
                raise ValueError(f"Entry without exit in {word!r}")
            lengths.append(current + 1)
            current = 0
        elif current:
            raise ValueError(f"Diagonal factor inside an excursion in {word!r}")
    if current:
        raise ValueError(f"Unclosed excursion in {word!r}")
    return tuple(lengths)


def class_pattern(lengths: tuple[int, ...], k: int) -> str:
    """Representative operator string: excursions first, then diagonals."""
    names = iter("ijklpqrstuw")
    parts = []
    for length in lengths:
        current = next(names)
        parts += ["b_n", f"b_{current}"]
        for _ in range(length - 2):
            following = next(names)
            parts += [f"b_{current}†", f"b_{following}"]
            current = following
        parts += [f"b_{current}†", "b_n†"]
    parts += ["b_n", "b_n†"] * (k - sum(lengths))
    return " ".join(parts)


def _class_key(lengths: tuple[int, ...]) -> tuple:
    return (sum(lengths), -len(lengths), lengths)


def table1_report() -> list[Table1Row]:
    """Fermion fourth-moment term classes with multiplicity, plus the total."""
    k = 4
    classes: dict[tuple[int, ...], list[MomentTerm]] = {}
    for term in moment_terms(k, Statistics.FERMION):
        key = tuple(sorted(excursion_lengths(term.word), reverse=True))
        classes.setdefault(key, []).append(term)

    rows = []
    total = MPolynomial()
    count = 0
    for key in sorted(classes, key=_class_key):
        members = classes[key]
        polynomial = MPolynomial()
        for member in members:
            polynomial = polynomial + member.polynomial
        rows.append(Table1Row(class_pattern(key, k), len(members), polynomial))
        total = total + polynomial
        count += len(members)
    rows.append(Table1Row("Total", count, total))
    return rows


def reference_rows() -> list[Table1Row]:
    return [
        Table1Row(
            pattern,
            count,
            MPolynomial.from_expr(sum(c * M ** (p + 1) for p, c in enumerate(coeffs))),
        )
        for pattern, count, coeffs in REFERENCE_FOURTH_MOMENT_TABLE
    ]


def compare_with_reference(rows: list[Table1Row] | None = None) -> list[str]:
    """Differences between computed rows and the published table; empty if equal."""
    rows = table1_report() if rows is None else rows
    expected = reference_rows()
    errors = []
    if len(rows) != len(expected):
        errors.append(f"Expected {len(expected)} rows, got {len(rows)}")
    for got, want in zip(rows, expected):
        if got.pattern != want.pattern:
            errors.append(f"Pattern {got.pattern!r} != {want.pattern!r}")
        if got.term_count != want.term_count:
            errors.append(f"{want.pattern}: count {got.term_count} != {want.term_count}")
        if got.polynomial != want.polynomial:
            errors.append(f"{want.pattern}: {got.polynomial} != {want.polynomial}")
    return errors


def is_identically_m(polynomial: MPolynomial) -> bool:
    return polynomial == MPolynomial(((1, sympy.Integer(1)),))

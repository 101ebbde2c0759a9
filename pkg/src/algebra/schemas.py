"""JSON documents for symbolic expressions.

A term serializes as

    {"coeff": [num, den, num_im, den_im],
     "deltas": [[a, b], ...],
     "V": [[p, q], ...],
     "ops": [["a" | "c", index], ...],
     "sums": [index, ...]}

Indices are written as strings: ``"n"`` for the occupied mode, a decimal
number for a concrete mode id, a name for a symbolic index restricted to the
vacuum modes and a name with a trailing ``*`` for an unrestricted one.
"""

import sympy
from pydantic import BaseModel, ConfigDict, Field, field_validator

from src.algebra.operators import (
    OCCUPIED,
    Expression,
    ModeIndex,
    OperatorSymbol,
    OpKind,
    Term,
)
from src.algebra.reduction import MPolynomial


def index_to_text(index: ModeIndex) -> str:
    if index.is_symbolic:
        return index.name if index.restricted else f"{index.name}*"
    if index.is_occupied:
        return "n"
    return str(index.value)


def index_from_text(text: str) -> ModeIndex:
    if text == "n":
        return OCCUPIED
    if text.isdigit():
        value = int(text)
        return OCCUPIED if value == 0 else ModeIndex.concrete(value)
    if text.endswith("*"):
        return ModeIndex.symbolic(text[:-1], restricted=False)
    return ModeIndex.symbolic(text)


def _split_rational(value: sympy.Expr) -> tuple[int, int]:
    r = sympy.Rational(value)
    return int(r.p), int(r.q)


class TermDocument(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    coeff: tuple[int, int, int, int]
    deltas: list[tuple[str, str]] = Field(default_factory=list)
    overlaps: list[tuple[str, str]] = Field(default_factory=list, alias="V")
    ops: list[tuple[str, str]] = Field(default_factory=list)
    sums: list[str] = Field(default_factory=list)

    @field_validator("coeff")
    @classmethod
    def denominators_positive(cls, v: tuple[int, int, int, int]) -> tuple[int, int, int, int]:
        if v[1] <= 0 or v[3] <= 0:
            raise ValueError(f"Coefficient denominators must be positive, got {v}")
        return v

    @field_validator("ops")
    @classmethod
    def op_kinds_known(cls, v: list[tuple[str, str]]) -> list[tuple[str, str]]:
        allowed = {kind.value for kind in OpKind}
        for kind, _ in v:
            if kind not in allowed:
                raise ValueError(f"Operator kind must be one of {sorted(allowed)}, got {kind!r}")
        return v


class ExpressionDocument(BaseModel):
    terms: list[TermDocument]


class PolynomialDocument(BaseModel):
    """m-polynomial as {power: [num, den]}."""

    coeffs: dict[int, tuple[int, int]]


def term_to_document(term: Term) -> TermDocument:
    real_num, real_den = _split_rational(sympy.re(term.coefficient))
    imag_num, imag_den = _split_rational(sympy.im(term.coefficient))
    return TermDocument(
        coeff=(real_num, real_den, imag_num, imag_den),
        deltas=[(index_to_text(a), index_to_text(b)) for a, b in term.deltas],
        V=[(index_to_text(p), index_to_text(q)) for p, q in term.overlaps],
        ops=[(op.kind.value, index_to_text(op.index)) for op in term.operators],
        sums=[index_to_text(s) for s in term.sums],
    )


def term_from_document(doc: TermDocument) -> Term:
    real = sympy.Rational(doc.coeff[0], doc.coeff[1])
    imag = sympy.Rational(doc.coeff[2], doc.coeff[3])
    return Term(
        coefficient=real + sympy.I * imag,
        deltas=tuple((index_from_text(a), index_from_text(b)) for a, b in doc.deltas),
        overlaps=tuple((index_from_text(p), index_from_text(q)) for p, q in doc.overlaps),
        operators=tuple(
            OperatorSymbol(OpKind(kind), index_from_text(index)) for kind, index in doc.ops
        ),
        sums=tuple(index_from_text(s) for s in doc.sums),
    )


def expression_to_document(expr: Expression) -> ExpressionDocument:
    return ExpressionDocument(terms=[term_to_document(t) for t in expr.terms])


def expression_from_document(doc: ExpressionDocument) -> Expression:
    return Expression.of(term_from_document(t) for t in doc.terms)


def polynomial_to_document(polynomial: MPolynomial) -> PolynomialDocument:
    return PolynomialDocument(
        coeffs={power: _split_rational(value) for power, value in polynomial.coeffs}
    )


def polynomial_from_document(doc: PolynomialDocument) -> MPolynomial:
    return MPolynomial(
        tuple((power, sympy.Rational(num, den)) for power, (num, den) in doc.coeffs.items())
    )

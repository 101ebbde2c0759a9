"""Reduction of vacuum expectation values to exact polynomials in m.

The scalar grammar is: exact coefficient, Kronecker deltas between mode
indices, overlap entries V_pq and sums over symbolic indices. For a complete
basis V is a projection, so an unrestricted chain sum collapses,

    sum_i V_ai V_ib = V_ab,

and a chain that starts and ends on the occupied mode is V_00 = m. Sums
restricted to the vacuum modes are rewritten as the unrestricted sum minus
the occupied-mode assignment (inclusion-exclusion) before collapsing.
"""

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import sympy

from src.algebra.operators import Expression, ModeIndex, Term, delta_value

M = sympy.Symbol("m")


class UnsupportedExpressionError(ValueError):
    """Raised for scalars outside the V / delta / restricted-sum grammar."""


@dataclass(frozen=True)
class MPolynomial:
    """Exact polynomial in m, stored as sorted (power, rational) pairs."""

    coeffs: tuple[tuple[int, sympy.Rational], ...] = ()

    def __post_init__(self):
        cleaned = {}
        for power, value in self.coeffs:
            value = sympy.Rational(value)
            if power < 0:
                raise ValueError(f"Negative power of m: {power}")
            cleaned[int(power)] = cleaned.get(int(power), sympy.Integer(0)) + value
        object.__setattr__(
            self,
            "coeffs",
            tuple(sorted((p, v) for p, v in cleaned.items() if v != 0)),
        )

    @classmethod
    def from_dict(cls, mapping: dict[int, object]) -> "MPolynomial":
        return cls(tuple(mapping.items()))

    @classmethod
    def from_expr(cls, expr) -> "MPolynomial":
        poly = sympy.Poly(sympy.expand(expr), M)
        if poly.is_zero:
            return cls()
        pairs = []
        for (power,), value in poly.terms():
            if not value.is_rational:
                raise UnsupportedExpressionError(f"Non-rational coefficient {value}")
            pairs.append((power, value))
        return cls(tuple(pairs))

    def as_dict(self) -> dict[int, sympy.Rational]:
        return dict(self.coeffs)

    def as_expr(self) -> sympy.Expr:
        return sum((v * M**p for p, v in self.coeffs), sympy.Integer(0))

    def coefficient(self, power: int) -> sympy.Rational:
        return self.as_dict().get(power, sympy.Integer(0))

    @property
    def degree(self) -> int:
        return self.coeffs[-1][0] if self.coeffs else 0

    def evaluate(self, m: float) -> float:
        return float(sum(float(v) * m**p for p, v in self.coeffs))

    def __add__(self, other: "MPolynomial") -> "MPolynomial":
        return MPolynomial(self.coeffs + other.coeffs)

    def __mul__(self, other) -> "MPolynomial":
        if isinstance(other, MPolynomial):
            return MPolynomial.from_expr(self.as_expr() * other.as_expr())
        return MPolynomial(tuple((p, v * other) for p, v in self.coeffs))

    __rmul__ = __mul__

    def __str__(self) -> str:
        return str(self.as_expr()) if self.coeffs else "0"


def chain_polynomial(length: int) -> MPolynomial:
    """sum over r = length restricted indices of V_0i1 V_i1i2 ... V_ir0 = m(1-m)^r."""
    return MPolynomial.from_expr(M * (1 - M) ** length)


def _resolve_deltas(term: Term) -> Term | None:
    """Eliminate deltas by substituting one summed index for the other."""
    while term.deltas:
        (a, b), rest = term.deltas[0], term.deltas[1:]
        value = delta_value(a, b)
        if value == 0:
            return None
        if value == 1:
            term = Term(term.coefficient, rest, term.overlaps, term.operators, term.sums)
            continue
        summed = set(term.sums)
        if a in summed and (b.restricted or not a.restricted or b not in summed):
            gone, kept = a, b
        elif b in summed:
            gone, kept = b, a
        else:
            raise UnsupportedExpressionError(f"Delta between free indices {a} and {b}")
        if gone.restricted and kept.is_symbolic and not kept.restricted:
            raise UnsupportedExpressionError(
                f"Cannot merge restricted {gone} into unrestricted free index {kept}"
            )
        term = Term(term.coefficient, rest, term.overlaps, term.operators, term.sums)
        term = term.substitute({gone: kept})
        if term.is_zero:
            return None
    return term


def _canonical_structure(term: Term) -> tuple[tuple, tuple]:
    """Overlap factors and sums with dummies renamed by first appearance."""
    mapping: dict[ModeIndex, str] = {}
    for pair in term.overlaps:
        for index in pair:
            if index.is_symbolic and index not in mapping:
                mapping[index] = f"s{len(mapping)}"
    for s in term.sums:
        if s not in mapping:
            mapping[s] = f"s{len(mapping)}"

    def code(index: ModeIndex):
        if index.is_occupied:
            return "0"
        if index.is_symbolic:
            return mapping[index]
        raise UnsupportedExpressionError(
            f"Concrete vacuum mode {index} has no value in terms of m"
        )

    factors = tuple(sorted((code(p), code(q)) for p, q in term.overlaps))
    sums = tuple(sorted((mapping[s], s.restricted) for s in term.sums))
    return factors, sums


def _collapse(factors: list[tuple[str, str]], summed: list[str]) -> int:
    """Collapse unrestricted chain sums; returns the number of V_00 left."""
    factors = list(factors)
    for s in summed:
        incoming = [f for f in factors if f[1] == s]
        outgoing = [f for f in factors if f[0] == s]
        if len(incoming) != 1 or len(outgoing) != 1 or incoming[0] == (s, s):
            raise UnsupportedExpressionError(
                f"Index {s} is not an interior chain index (in={incoming}, out={outgoing})"
            )
        factors.remove(incoming[0])
        factors.remove(outgoing[0])
        factors.append((incoming[0][0], outgoing[0][1]))
    for p, q in factors:
        if (p, q) != ("0", "0"):
            raise UnsupportedExpressionError(f"Open factor V_{p}{q} after collapsing")
    return len(factors)


@lru_cache(maxsize=None)
def _reduce_structure(factors: tuple, sums: tuple) -> tuple[tuple[int, int], ...]:
    restricted = [name for name, is_restricted in sums if is_restricted]
    free = [name for name, is_restricted in sums if not is_restricted]
    powers: dict[int, int] = {}
    for size in range(len(restricted) + 1):
        for chosen in combinations(restricted, size):
            pinned = set(chosen)
            substituted = [
                tuple("0" if i in pinned else i for i in pair) for pair in factors
            ]
            remaining = [r for r in restricted if r not in pinned] + free
            power = _collapse(substituted, remaining)
            powers[power] = powers.get(power, 0) + (-1) ** size
    return tuple(sorted((p, c) for p, c in powers.items() if c))


def reduce_term(term: Term) -> MPolynomial:
    if term.operators:
        raise UnsupportedExpressionError(f"Operators left in a scalar term: {term}")
    resolved = _resolve_deltas(term)
    if resolved is None or resolved.is_zero:
        return MPolynomial()
    for pair in resolved.overlaps:
        for index in pair:
            if index.is_symbolic and index not in resolved.sums:
                raise UnsupportedExpressionError(f"Free symbolic index {index} in {term}")
    factors, sums = _canonical_structure(resolved)
    coefficient = resolved.coefficient
    if sympy.im(coefficient) != 0:
        raise UnsupportedExpressionError(f"Complex coefficient {coefficient} in {term}")
    return MPolynomial(
        tuple((p, sympy.re(coefficient) * c) for p, c in _reduce_structure(factors, sums))
    )


def reduce_to_m_polynomial(scalar: Expression | Term) -> MPolynomial:
    """Exact m-polynomial of a scalar expression over a complete basis."""
    terms = scalar.terms if isinstance(scalar, Expression) else (scalar,)
    total = MPolynomial()
    for term in terms:
        total = total + reduce_term(term)
    return total

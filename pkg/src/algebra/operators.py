"""Mode operators, scalar factors and terms of the symbolic engine.

A term is

    coefficient * prod(delta_ab) * prod(V_pq) * (operator string)

summed over its symbolic dummy indices. Coefficients are exact sympy
numbers (Gaussian rationals). Mode indices come in three kinds: the occupied
mode (printed ``n``), named symbolic indices (restricted to the vacuum modes
unless marked otherwise) and concrete integer mode ids, where id 0 is the
occupied mode.
"""

from dataclasses import dataclass, replace
from enum import Enum
from itertools import count

import sympy


class Statistics(str, Enum):
    FERMION = "fermion"
    BOSON = "boson"
    # Occupied mode replaced by the ordinary number 1, vacuum modes bosonic
    COHERENT = "coherent"


class IndexKind(str, Enum):
    OCCUPIED = "occupied"
    SYMBOLIC = "symbolic"
    CONCRETE = "concrete"


_KIND_RANK = {IndexKind.OCCUPIED: 0, IndexKind.CONCRETE: 1, IndexKind.SYMBOLIC: 2}


@dataclass(frozen=True)
class ModeIndex:
    kind: IndexKind
    name: str = ""
    value: int = 0
    # Symbolic indices only: True means the index never takes the occupied mode
    restricted: bool = True

    @classmethod
    def occupied(cls) -> "ModeIndex":
        return cls(IndexKind.OCCUPIED, name="n")

    @classmethod
    def symbolic(cls, name: str, restricted: bool = True) -> "ModeIndex":
        if not name:
            raise ValueError("Symbolic indices need a name")
        return cls(IndexKind.SYMBOLIC, name=name, restricted=restricted)

    @classmethod
    def concrete(cls, value: int) -> "ModeIndex":
        if value < 0:
            raise ValueError(f"Mode ids are non-negative, got {value}")
        return cls(IndexKind.CONCRETE, value=int(value))

    @property
    def is_symbolic(self) -> bool:
        return self.kind is IndexKind.SYMBOLIC

    @property
    def is_occupied(self) -> bool:
        return self.kind is IndexKind.OCCUPIED or (
            self.kind is IndexKind.CONCRETE and self.value == 0
        )

    def sort_key(self) -> tuple:
        return (_KIND_RANK[self.kind], self.name, self.value)

    def renamed(self, name: str) -> "ModeIndex":
        return replace(self, name=name)

    def __str__(self) -> str:
        if self.kind is IndexKind.CONCRETE:
            return str(self.value)
        return self.name


OCCUPIED = ModeIndex.occupied()


def delta_value(a: ModeIndex, b: ModeIndex) -> int | None:
    """Value of delta_ab when it is decidable without knowing the sums, else None."""
    if a == b:
        return 1
    if not a.is_symbolic and not b.is_symbolic:
        if a.is_occupied or b.is_occupied:
            return int(a.is_occupied and b.is_occupied)
        return int(a.value == b.value)
    for s, other in ((a, b), (b, a)):
        if s.is_symbolic and s.restricted and other.is_occupied:
            return 0
    return None


class OpKind(str, Enum):
    ANNIHILATE = "a"
    CREATE = "c"


@dataclass(frozen=True)
class OperatorSymbol:
    kind: OpKind
    index: ModeIndex

    @property
    def is_create(self) -> bool:
        return self.kind is OpKind.CREATE

    def __str__(self) -> str:
        dagger = "†" if self.is_create else ""
        return f"b_{self.index}{dagger}"


def B(index: ModeIndex | int) -> OperatorSymbol:
    """Annihilation operator; integers become concrete mode ids."""
    if isinstance(index, int):
        index = ModeIndex.concrete(index)
    return OperatorSymbol(OpKind.ANNIHILATE, index)


def Bd(index: ModeIndex | int) -> OperatorSymbol:
    """Creation operator; integers become concrete mode ids."""
    if isinstance(index, int):
        index = ModeIndex.concrete(index)
    return OperatorSymbol(OpKind.CREATE, index)


def _pair_key(pair: tuple[ModeIndex, ModeIndex]) -> tuple:
    return (pair[0].sort_key(), pair[1].sort_key())


def _index_key(index: ModeIndex) -> tuple:
    return (*index.sort_key(), index.restricted)


def _ordered_pair(a: ModeIndex, b: ModeIndex) -> tuple[ModeIndex, ModeIndex]:
    return (a, b) if a.sort_key() <= b.sort_key() else (b, a)


@dataclass(frozen=True)
class Term:
    coefficient: sympy.Expr = sympy.Integer(1)
    deltas: tuple[tuple[ModeIndex, ModeIndex], ...] = ()
    overlaps: tuple[tuple[ModeIndex, ModeIndex], ...] = ()
    operators: tuple[OperatorSymbol, ...] = ()
    sums: tuple[ModeIndex, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "coefficient", sympy.sympify(self.coefficient))
        kept = []
        for a, b in self.deltas:
            value = delta_value(a, b)
            if value == 0:
                object.__setattr__(self, "coefficient", sympy.Integer(0))
            elif value is None:
                kept.append(_ordered_pair(a, b))
        object.__setattr__(self, "deltas", tuple(sorted(kept, key=_pair_key)))
        object.__setattr__(self, "overlaps", tuple(sorted(self.overlaps, key=_pair_key)))
        for s in self.sums:
            if not s.is_symbolic:
                raise ValueError(f"Only symbolic indices can be summed, got {s}")

    @property
    def is_zero(self) -> bool:
        return self.coefficient == 0

    @property
    def is_scalar(self) -> bool:
        return not self.operators

    def scaled(self, factor) -> "Term":
        return replace(self, coefficient=self.coefficient * factor)

    def with_delta(self, a: ModeIndex, b: ModeIndex) -> "Term":
        return replace(self, deltas=self.deltas + ((a, b),))

    def times(self, other: "Term") -> "Term":
        """Product of two terms; summed dummies must not clash."""
        clash = set(self.sums) & set(other.sums)
        if clash:
            raise ValueError(f"Summed indices shared between factors: {sorted(map(str, clash))}")
        return Term(
            coefficient=self.coefficient * other.coefficient,
            deltas=self.deltas + other.deltas,
            overlaps=self.overlaps + other.overlaps,
            operators=self.operators + other.operators,
            sums=self.sums + other.sums,
        )

    def substitute(self, mapping: dict[ModeIndex, ModeIndex]) -> "Term":
        def sub(i: ModeIndex) -> ModeIndex:
            return mapping.get(i, i)

        return Term(
            coefficient=self.coefficient,
            deltas=tuple((sub(a), sub(b)) for a, b in self.deltas),
            overlaps=tuple((sub(a), sub(b)) for a, b in self.overlaps),
            operators=tuple(replace(op, index=sub(op.index)) for op in self.operators),
            sums=tuple(s for s in self.sums if s not in mapping),
        )

    def shape(self) -> tuple:
        """Everything except the coefficient; canonical terms merge on it."""
        return (self.deltas, self.overlaps, self.operators, self.sums)

    def sort_key(self) -> tuple:
        """Total order on shapes; fixes the term order of an Expression."""
        return (
            len(self.operators),
            tuple((op.kind.value, _index_key(op.index)) for op in self.operators),
            tuple((_index_key(a), _index_key(b)) for a, b in self.deltas),
            tuple((_index_key(p), _index_key(q)) for p, q in self.overlaps),
            tuple(_index_key(index) for index in self.sums),
        )

    def __str__(self) -> str:
        parts = [str(self.coefficient)]
        if self.sums:
            parts.append("sum[" + ",".join(map(str, self.sums)) + "]")
        parts += [f"d({a},{b})" for a, b in self.deltas]
        parts += [f"V({p},{q})" for p, q in self.overlaps]
        parts += [str(op) for op in self.operators]
        return " ".join(parts)


def _dummy_names(taken: set[str]):
    letters = "ijklpqrstuw"
    for name in letters:
        if name not in taken:
            yield name
    for n in count(1):
        for name in letters:
            candidate = f"{name}{n}"
            if candidate not in taken:
                yield candidate


def rename_dummies(term: Term) -> Term:
    """Rename summed indices in first-use order.

    Creators are visited left to right, annihilators right to left, then the
    overlap and delta factors; this matches the like-kind ordering used by
    normal ordering so that renaming a sorted string keeps it sorted.
    """
    if not term.sums:
        return term
    dummies = set(term.sums)
    free_names = {
        i.name
        for i in _indices(term)
        if i.is_symbolic and i not in dummies
    }
    creators = [op.index for op in term.operators if op.is_create]
    annihilators = [op.index for op in term.operators if not op.is_create][::-1]
    visit = creators + annihilators
    visit += [i for pair in term.overlaps + term.deltas for i in pair]
    visit += list(term.sums)

    names = _dummy_names(free_names)
    mapping: dict[ModeIndex, ModeIndex] = {}
    for index in visit:
        if index in dummies and index not in mapping:
            mapping[index] = index.renamed(next(names))
    renamed = term.substitute(mapping)
    return replace(renamed, sums=tuple(mapping[s] for s in term.sums))


def _indices(term: Term):
    for op in term.operators:
        yield op.index
    for pair in term.deltas + term.overlaps:
        yield from pair
    yield from term.sums


@dataclass(frozen=True)
class Expression:
    terms: tuple[Term, ...] = ()

    @classmethod
    def of(cls, terms) -> "Expression":
        """Merge terms with equal shape, drop zero coefficients, sort by shape."""
        merged: dict[tuple, sympy.Expr] = {}
        proto: dict[tuple, Term] = {}
        for term in terms:
            if term.is_zero:
                continue
            term = rename_dummies(term)
            term = replace(term, sums=tuple(sorted(term.sums, key=ModeIndex.sort_key)))
            key = term.shape()
            merged[key] = merged.get(key, sympy.Integer(0)) + term.coefficient
            proto.setdefault(key, term)
        kept = []
        for key, coefficient in merged.items():
            coefficient = sympy.expand(coefficient)
            if coefficient != 0:
                kept.append(replace(proto[key], coefficient=coefficient))
        return cls(tuple(sorted(kept, key=Term.sort_key)))

    @property
    def is_scalar(self) -> bool:
        return all(t.is_scalar for t in self.terms)

    def __add__(self, other: "Expression") -> "Expression":
        return Expression.of(self.terms + other.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def scalar_value(self) -> sympy.Expr:
        """Numeric value of an expression free of deltas, overlaps and operators."""
        total = sympy.Integer(0)
        for term in self.terms:
            if term.deltas or term.overlaps or term.operators or term.sums:
                raise ValueError(f"Term is not a plain number: {term}")
            total += term.coefficient
        return sympy.expand(total)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(f"({t})" for t in self.terms)

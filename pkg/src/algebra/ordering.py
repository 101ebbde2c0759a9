"""Normal ordering and vacuum expectation values of operator strings.

Rewriting rules, with s = -1 for fermions and +1 for bosons:

    b_i b_j†  ->  delta_ij + s b_j† b_i
    like-kind swaps pick up s per transposition

The coherent flavor first replaces every occupied-mode symbol by the number
1 and treats the remaining vacuum modes as bosons.
"""

from dataclasses import replace
from typing import Iterator

from src.algebra.operators import (
    Expression,
    OperatorSymbol,
    Statistics,
    Term,
    delta_value,
    rename_dummies,
)

# Renaming and re-sorting alternate until the string stops changing
_MAX_CANONICAL_PASSES = 8


def _exchange_sign(stats: Statistics) -> int:
    return -1 if stats is Statistics.FERMION else 1


def strip_occupied(term: Term, stats: Statistics) -> Term:
    """Coherent flavor: occupied-mode operators become the scalar 1."""
    if stats is not Statistics.COHERENT:
        return term
    for op in term.operators:
        if op.index.is_symbolic and not op.index.restricted:
            raise ValueError(
                f"Coherent flavor needs restricted symbolic indices, got {op.index}"
            )
    kept = tuple(op for op in term.operators if not op.index.is_occupied)
    return replace(term, operators=kept)


def is_normal_ordered(operators: tuple[OperatorSymbol, ...]) -> bool:
    seen_annihilator = False
    for op in operators:
        if op.is_create and seen_annihilator:
            return False
        seen_annihilator = seen_annihilator or not op.is_create
    return True


def _sort_block(
    block: list[OperatorSymbol], descending: bool, stats: Statistics,
) -> tuple[int, list[OperatorSymbol]] | None:
    order = sorted(
        range(len(block)),
        key=lambda i: block[i].index.sort_key(),
        reverse=descending,
    )
    ordered = [block[i] for i in order]
    if stats is Statistics.FERMION:
        for left, right in zip(ordered, ordered[1:]):
            if left.index == right.index:
                # b_i b_i = 0 and b_i† b_i† = 0
                return None
        inversions = sum(
            1
            for a in range(len(order))
            for b in range(a + 1, len(order))
            if order[a] > order[b]
        )
        return (-1) ** inversions, ordered
    return 1, ordered


def _sort_like_kinds(term: Term, stats: Statistics) -> Term | None:
    creators = [op for op in term.operators if op.is_create]
    annihilators = [op for op in term.operators if not op.is_create]
    sorted_creators = _sort_block(creators, descending=False, stats=stats)
    sorted_annihilators = _sort_block(annihilators, descending=True, stats=stats)
    if sorted_creators is None or sorted_annihilators is None:
        return None
    sign = sorted_creators[0] * sorted_annihilators[0]
    return replace(
        term,
        coefficient=term.coefficient * sign,
        operators=tuple(sorted_creators[1] + sorted_annihilators[1]),
    )


def _canonical(term: Term, stats: Statistics) -> Term | None:
    for _ in range(_MAX_CANONICAL_PASSES):
        renamed = rename_dummies(term)
        ordered = _sort_like_kinds(renamed, stats)
        if ordered is None:
            return None
        if ordered == term:
            break
        term = ordered
    return term


def normal_order(term: Term | Expression, stats: Statistics) -> Expression:
    """Rewrite so that every creator precedes every annihilator.

    Creators end up sorted by index, annihilators in reverse index order.
    """
    pending = list(term.terms) if isinstance(term, Expression) else [term]
    pending = [strip_occupied(t, stats) for t in pending]
    sign = _exchange_sign(stats)
    done: list[Term] = []
    while pending:
        current = pending.pop()
        if current.is_zero:
            continue
        ops = current.operators
        position = next(
            (
                i
                for i in range(len(ops) - 1)
                if not ops[i].is_create and ops[i + 1].is_create
            ),
            None,
        )
        if position is None:
            canonical = _canonical(current, stats)
            if canonical is not None:
                done.append(canonical)
            continue
        annihilator, creator = ops[position], ops[position + 1]
        swapped = ops[:position] + (creator, annihilator) + ops[position + 2:]
        pending.append(
            replace(current, coefficient=current.coefficient * sign, operators=swapped)
        )
        contracted = current.with_delta(annihilator.index, creator.index)
        if not contracted.is_zero:
            pending.append(replace(contracted, operators=ops[:position] + ops[position + 2:]))
    return Expression.of(done)


def contractions(
    operators: tuple[OperatorSymbol, ...], stats: Statistics,
) -> Iterator[tuple[int, tuple]]:
    """Full vacuum contractions of a string as (sign, undecided delta pairs).

    The leftmost operator must be an annihilator; it is carried to the right
    until it meets a creator, contributing delta_ij and the exchange sign of
    every operator it passes.
    """
    if not operators:
        yield 1, ()
        return
    first = operators[0]
    if first.is_create or not operators[-1].is_create:
        return
    fermionic = stats is Statistics.FERMION
    for j in range(1, len(operators)):
        partner = operators[j]
        if not partner.is_create:
            continue
        value = delta_value(first.index, partner.index)
        if value == 0:
            continue
        sign = -1 if fermionic and (j - 1) % 2 else 1
        pair = () if value == 1 else ((first.index, partner.index),)
        rest = operators[1:j] + operators[j + 1:]
        for inner_sign, inner_pairs in contractions(rest, stats):
            yield sign * inner_sign, pair + inner_pairs


def vacuum_expectation(expr: Term | Expression, stats: Statistics) -> Expression:
    """<0| expr |0>: the scalar part that survives normal ordering."""
    terms = list(expr.terms) if isinstance(expr, Expression) else [expr]
    scalars: list[Term] = []
    for term in terms:
        term = strip_occupied(term, stats)
        for sign, pairs in contractions(term.operators, stats):
            scalars.append(
                replace(
                    term,
                    coefficient=term.coefficient * sign,
                    deltas=term.deltas + pairs,
                    operators=(),
                )
            )
    return Expression.of(scalars)

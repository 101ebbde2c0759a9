"""Tests for the JSON documents of bases, expressions and polynomials."""

import json

import numpy as np
import pytest
import sympy
from pydantic import ValidationError

from src.algebra.moments import moment_terms
from src.algebra.operators import OCCUPIED, B, Bd, ModeIndex, Statistics, Term
from src.algebra.reduction import M, MPolynomial, reduce_to_m_polynomial
from src.algebra.schemas import (
    ExpressionDocument,
    PolynomialDocument,
    TermDocument,
    expression_from_document,
    expression_to_document,
    index_from_text,
    index_to_text,
    polynomial_from_document,
    polynomial_to_document,
    term_from_document,
    term_to_document,
)
from src.model.instance import random_instance
from src.model.schemas import BasisDocument, from_document, to_document


class TestBasisDocument:
    def test_round_trip(self):
        instance = random_instance(5, seed=9)
        doc = to_document(instance.basis, instance.subvolume)
        restored = BasisDocument.model_validate_json(doc.model_dump_json())
        basis, v = from_document(restored)
        np.testing.assert_allclose(basis.modes, instance.basis.modes)
        assert v == instance.subvolume

    def test_without_subvolume(self):
        instance = random_instance(4, seed=1)
        assert to_document(instance.basis).subvolume == []

    def test_empty_modes(self):
        with pytest.raises(ValidationError, match="must not be empty"):
            BasisDocument(n_sites=2, modes=[])

    def test_partial_row(self):
        with pytest.raises(ValidationError, match="do not fill rows"):
            BasisDocument(n_sites=2, modes=[(1.0, 0.0), (0.0, 0.0), (0.0, 0.0)])

    def test_non_orthonormal_rows_rejected_on_load(self):
        doc = BasisDocument(n_sites=2, modes=[(1.0, 0.0), (0.0, 0.0), (1.0, 0.0), (0.0, 0.0)])
        with pytest.raises(ValueError, match="orthonormal"):
            from_document(doc)


class TestIndexText:
    def test_index_forms(self):
        assert index_to_text(OCCUPIED) == "n"
        assert index_to_text(ModeIndex.concrete(3)) == "3"
        assert index_to_text(ModeIndex.symbolic("i")) == "i"
        assert index_to_text(ModeIndex.symbolic("j", restricted=False)) == "j*"

    def test_parse(self):
        assert index_from_text("n") == OCCUPIED
        assert index_from_text("0") == OCCUPIED
        assert index_from_text("4") == ModeIndex.concrete(4)
        assert index_from_text("k*") == ModeIndex.symbolic("k", restricted=False)


class TestTermDocument:
    def test_serializes_overlaps_as_v(self):
        i = ModeIndex.symbolic("i")
        term = Term(
            coefficient=sympy.Rational(1, 2) + sympy.I / 3,
            overlaps=((OCCUPIED, i), (i, OCCUPIED)),
            operators=(B(1), Bd(i)),
            sums=(i,),
        )
        doc = json.loads(term_to_document(term).model_dump_json(by_alias=True))
        assert doc["coeff"] == [1, 2, 1, 3]
        assert doc["V"] == [["n", "i"], ["i", "n"]]
        assert doc["ops"] == [["a", "1"], ["c", "i"]]
        assert term_from_document(TermDocument.model_validate(doc)) == term

    def test_zero_denominator(self):
        with pytest.raises(ValidationError, match="denominators"):
            TermDocument(coeff=(1, 0, 0, 1))

    def test_unknown_operator_kind(self):
        with pytest.raises(ValidationError, match="Operator kind"):
            TermDocument(coeff=(1, 1, 0, 1), ops=[("x", "1")])

    def test_expression_round_trip_keeps_value(self):
        expectation = moment_terms(3, Statistics.FERMION)[-1].expectation
        doc = ExpressionDocument.model_validate_json(
            expression_to_document(expectation).model_dump_json(by_alias=True)
        )
        restored = expression_from_document(doc)
        assert len(restored) == len(expectation)
        assert reduce_to_m_polynomial(restored) == reduce_to_m_polynomial(expectation)


class TestPolynomialDocument:
    def test_round_trip_through_json(self):
        polynomial = MPolynomial.from_expr(M - sympy.Rational(3, 2) * M**4)
        doc = PolynomialDocument.model_validate_json(polynomial_to_document(polynomial).model_dump_json())
        assert doc.coeffs == {1: (1, 1), 4: (-3, 2)}
        assert polynomial_from_document(doc) == polynomial

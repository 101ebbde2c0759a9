"""Tests for lattices, mode bases, overlap matrices and random instances."""

import logging

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.model.basis import (
    BasisSet,
    DegenerateInputError,
    build_basis,
    closure_residual,
    drop_mode,
    fourier_basis,
    orthonormality_residual,
    randomize_completion,
)
from src.model.instance import random_instance
from src.model.lattice import Lattice, LatticeMismatchError, Subvolume, random_subvolume
from src.model.overlap import OverlapMatrix, overlap_matrix


class TestLattice:
    def test_needs_two_sites(self):
        with pytest.raises(ValueError, match="at least 2"):
            Lattice(1)

    def test_inner_product_is_plain_sum(self):
        lattice = Lattice(3)
        assert lattice.inner([1j, 0, 1], [1, 2, 1]) == pytest.approx(1 - 1j)

    def test_subvolume_sites_sorted(self):
        v = Subvolume(Lattice(5), (4, 0, 2))
        assert v.sites == (0, 2, 4)
        assert len(v) == 3

    def test_subvolume_rejects_repeated_site(self):
        with pytest.raises(ValueError, match="unique"):
            Subvolume(Lattice(5), (1, 1))

    def test_subvolume_rejects_site_outside_lattice(self):
        with pytest.raises(ValueError, match="outside"):
            Subvolume(Lattice(5), (5,))

    def test_full_and_empty(self):
        lattice = Lattice(4)
        assert Subvolume.full(lattice).sites == (0, 1, 2, 3)
        assert Subvolume.empty(lattice).sites == ()

    def test_indicator(self):
        mask = Subvolume(Lattice(4), (1, 3)).indicator()
        assert mask.tolist() == [False, True, False, True]

    def test_random_subvolume_is_proper_and_nonempty(self):
        lattice = Lattice(6)
        rng = np.random.default_rng(0)
        for _ in range(50):
            v = random_subvolume(lattice, rng)
            assert 1 <= len(v) <= 5

    def test_random_subvolume_of_given_size(self):
        v = random_subvolume(Lattice(6), np.random.default_rng(1), size=4)
        assert len(v) == 4


class TestBasis:
    def test_fourier_basis_is_complete(self):
        basis = fourier_basis(Lattice(8))
        assert basis.is_complete
        assert closure_residual(basis) < 1e-12

    def test_rejects_non_orthonormal_rows(self):
        with pytest.raises(ValueError, match="orthonormal"):
            BasisSet(Lattice(2), np.array([[1, 0], [1, 0]]))

    def test_rejects_too_many_rows(self):
        with pytest.raises(ValueError):
            BasisSet(Lattice(2), np.eye(3)[:, :2])

    def test_build_basis_keeps_occupied_mode(self):
        lattice = Lattice(6)
        f0 = np.array([1, 2j, 0, -1, 0.5, 0], dtype=complex)
        basis = build_basis(lattice, f0)
        np.testing.assert_allclose(basis.occupied, f0 / np.linalg.norm(f0), atol=1e-12)
        assert basis.is_complete
        assert orthonormality_residual(basis.modes) < 1e-12

    def test_build_basis_from_site_indicator(self):
        basis = build_basis(Lattice(4), [0, 0, 1, 0])
        np.testing.assert_allclose(np.abs(basis.occupied), [0, 0, 1, 0], atol=1e-12)
        assert closure_residual(basis) < 1e-12

    def test_zero_occupied_mode_rejected(self):
        with pytest.raises(DegenerateInputError):
            build_basis(Lattice(4), np.zeros(4))

    def test_wrong_length_rejected(self):
        with pytest.raises(ValueError, match="4 entries"):
            build_basis(Lattice(4), np.ones(3))

    def test_randomize_completion_keeps_f0(self):
        basis = build_basis(Lattice(5), np.arange(1, 6))
        other = randomize_completion(basis, seed=3)
        np.testing.assert_allclose(other.occupied, basis.occupied)
        assert closure_residual(other) < 1e-12
        assert not np.allclose(other.modes[1:], basis.modes[1:])

    def test_drop_mode(self):
        basis = fourier_basis(Lattice(5))
        smaller = drop_mode(basis, 2)
        assert smaller.n_modes == 4
        assert not smaller.is_complete

    def test_drop_mode_rejects_occupied(self):
        with pytest.raises(ValueError, match="vacuum mode"):
            drop_mode(fourier_basis(Lattice(5)), 0)

    def test_closure_on_incomplete_basis_warns(self, caplog):
        basis = drop_mode(fourier_basis(Lattice(5)), 1)
        with caplog.at_level(logging.WARNING):
            residual = closure_residual(basis)
        assert residual > 0.1
        assert "incomplete basis" in caplog.text


class TestOverlap:
    def test_full_subvolume_gives_identity(self):
        basis = build_basis(Lattice(4), [1, 1, 0, 1j])
        v = overlap_matrix(basis, Subvolume.full(basis.lattice))
        np.testing.assert_allclose(v.entries, np.eye(4), atol=1e-12)
        assert v.m == pytest.approx(1.0)

    def test_empty_subvolume_gives_zero(self):
        basis = fourier_basis(Lattice(4))
        v = overlap_matrix(basis, Subvolume.empty(basis.lattice))
        assert np.all(v.entries == 0)
        assert v.m == 0.0

    def test_m_is_occupied_weight_in_subvolume(self):
        basis = build_basis(Lattice(4), [1, 1, 1, 1])
        v = overlap_matrix(basis, Subvolume(basis.lattice, (0, 2, 3)))
        assert v.m == pytest.approx(0.75)

    def test_complete_basis_gives_projection(self):
        instance = random_instance(7, seed=11)
        assert instance.overlap.is_projection()
        for k in range(1, 7):
            assert instance.overlap.chain_element(k) == pytest.approx(instance.m, abs=1e-12)

    def test_lattice_mismatch(self):
        with pytest.raises(LatticeMismatchError):
            overlap_matrix(fourier_basis(Lattice(4)), Subvolume(Lattice(5), (0,)))

    def test_from_entries_reads_m(self):
        v = OverlapMatrix.from_entries([[0.25, 0], [0, 1]])
        assert v.m == 0.25
        assert v.n_modes == 2

    def test_must_be_square(self):
        with pytest.raises(ValueError, match="square"):
            OverlapMatrix(np.zeros((2, 3)), 0.0)


class TestRandomInstance:
    def test_deterministic(self):
        a = random_instance(6, seed=(4, 2))
        b = random_instance(6, seed=(4, 2))
        np.testing.assert_array_equal(a.basis.modes, b.basis.modes)
        assert a.subvolume == b.subvolume

    def test_different_seeds_differ(self):
        a = random_instance(6, seed=1)
        b = random_instance(6, seed=2)
        assert not np.allclose(a.basis.occupied, b.basis.occupied)

    def test_explicit_subvolume_kept(self):
        v = Subvolume(Lattice(6), (1, 2))
        assert random_instance(6, seed=0, subvolume=v).subvolume == v

    @settings(max_examples=30, deadline=None)
    @given(n_sites=st.integers(min_value=2, max_value=9), seed=st.integers(0, 2**32 - 1))
    def test_overlap_is_projection_with_m_in_unit_interval(self, n_sites, seed):
        instance = random_instance(n_sites, seed)
        v = instance.overlap
        assert v.hermiticity_residual() < 1e-12
        assert v.idempotency_residual() < 1e-12
        assert -1e-12 <= v.m <= 1 + 1e-12

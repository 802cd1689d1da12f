"""Angular-operator verification: harmonic bases, K eigenstructure, and the
quadratic Casimir identity."""

from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from modestab import casimir as cs


# -- harmonic bases ----------------------------------------------------------------


def test_dimensions_small():
    assert cs.harmonic_basis(3, 1).dimension == 3
    assert cs.harmonic_basis(3, 2).dimension == 5      # 2l+1 at d=3
    assert cs.harmonic_basis(4, 1).dimension == 4


def test_dimension_binomial_oracle():
    from math import comb

    # d=5, l=3: C(7,4) - C(5,4) = 35 - 5 = 30
    assert comb(7, 4) - comb(5, 4) == 30
    assert cs.harmonic_basis(5, 3).dimension == 30


def test_basis_vectors_are_harmonic_and_independent():
    basis = cs.harmonic_basis(4, 3)
    monos = list(basis.monomials)
    index = {m: i for i, m in enumerate(monos)}
    lap = cs._laplacian_matrix(4, 3, monos, index)
    assert not np.any(lap @ basis.vectors.T)
    # free-column structure gives independence: the free submatrix is diagonal
    sub = basis.vectors[:, list(basis.free_cols)]
    assert np.count_nonzero(sub - np.diag(np.diagonal(sub))) == 0
    assert all(s != 0 for s in basis.scales)


def test_size_cap():
    with pytest.raises(cs.SizeCapExceeded):
        cs.harmonic_basis(7, 4, cap=100)


# -- K matrix ----------------------------------------------------------------------


def test_k_matrix_l1_is_integer_and_invariant():
    op = cs.k_matrix(3, 1)
    assert op.size == 9
    # trace is zero: the diagonal operators K_aa vanish
    tr = sum(op.entry(i, i) for i in range(op.size))
    assert tr == 0


def test_k_matrix_l0_annihilates_constants():
    op = cs.k_matrix(4, 0)
    assert not np.any(op.numerators)


def test_eigen_check_small_cases():
    rep = cs.eigen_check(3, 1)
    assert rep.eigenvalues == (-1, 1, 2)
    assert rep.multiplicities == (5, 3, 1)
    assert rep.dimension == 9 and rep.multiplicities_sum_ok
    assert rep.rank_cross_checked and rep.ok

    rep = cs.eigen_check(4, 1)
    assert sum(rep.multiplicities) == 16

    rep = cs.eigen_check(4, 2)
    assert rep.eigenvalues == (-2, 1, 4)
    assert rep.ok


def test_eigenvalues_depend_on_d_only_through_the_shift():
    for d in (3, 4, 5, 6):
        rep = cs.eigen_check(d, 2)
        assert rep.eigenvalues == (-2, 1, 2 + d - 2)
        assert rep.ok


def test_radial_field_in_top_eigenspace():
    for d in (3, 4, 5, 7):
        rep = cs.eigen_check(d, 1)
        assert rep.radial_field_contained


def test_minimal_polynomial_via_object_dtype_cross_check():
    # re-run the minimal polynomial identity for one case in exact object
    # arithmetic to validate the int64 fast path
    basis = cs.harmonic_basis(4, 2)
    ops = cs.AngularOperators(4, 2)
    blocks = cs._component_blocks(basis).astype(object)
    mats = {k: m.astype(object) for k, m in ops.k_mats.items()}

    def k_apply(block):
        out = np.zeros_like(block)
        for k in range(4):
            for j in range(4):
                if j != k:
                    out[k] += mats[(k, j)] @ block[j]
        return out

    for a in range(4):
        w = blocks[a]
        for mu in (-2, 1, 4):
            w = k_apply(w) - mu * w
        assert not np.any(w != 0)


def test_casimir_identity_small_grid():
    assert cs.casimir_identity_check(3, 1)
    assert cs.casimir_identity_check(5, 2)
    assert cs.casimir_identity_check(4, 0)   # left side collapses to -(d-1) I


def test_sphere_average_oracle():
    # direct values: <1> = 1, <xi_1^2> = 1/d, <xi_1^4> = 3/(d(d+2))
    assert cs.monomial_sphere_average((0, 0, 0), 3) == 1
    assert cs.monomial_sphere_average((2, 0, 0), 3) == Fraction(1, 3)
    assert cs.monomial_sphere_average((4, 0, 0), 3) == Fraction(3, 15)
    assert cs.monomial_sphere_average((1, 1, 0), 3) == 0
    # consistency: sum over i of <xi_i^2 * m> = <m> for any monomial m
    for mono in ((2, 0, 0), (1, 1, 2)):
        total = sum(cs.monomial_sphere_average(
            tuple(e + (2 if i == j else 0) for j, e in enumerate(mono)), 3)
            for i in range(3))
        # |xi|^2 = 1 on the sphere
        assert total == cs.monomial_sphere_average(mono, 3)


def test_k_entries_skew_symmetric_for_sphere_pairing():
    assert cs.k_entry_skew_symmetric(3, 2, 0, 1)
    assert cs.k_entry_skew_symmetric(4, 2, 1, 3)
    assert cs.k_entry_skew_symmetric(3, 3, 2, 0)

import json

import numpy as np
import pytest

from fockbench.algebra import (
    ConstraintSubspace,
    intertwining_check,
    relations_for,
    su2_bilinear,
    su2_hp,
    su11_bilinear,
    su11_hp,
    su_r1_bilinear,
    su_r1_hp,
    su_rp1_bilinear,
    su_rp1_hp,
    verify_algebra,
)
from fockbench.fock import Cutoff, basis_state, enumerate_basis


def _worst(reports):
    vals = [r["max_residual"] for r in reports if r["max_residual"] is not None]
    assert vals, "no interior states were checked"
    return max(vals)


def test_su11_bilinear_relations():
    basis = enumerate_basis(2, Cutoff.total(12))
    reports = verify_algebra(su11_bilinear(basis, 3.0))
    assert _worst(reports) < 1e-12
    assert all(r["interior_count"] > 0 for r in reports)


def test_su11_hp_relations_real_order():
    basis = enumerate_basis(1, Cutoff.per_mode(14))
    for M in (1.0, 2.5, 4.0):
        reports = verify_algebra(su11_hp(basis, M))
        assert _worst(reports) < 1e-12


def test_su11_lowest_weight():
    # K0 |0> = (M/2) |0> in the reduced picture
    basis = enumerate_basis(1, Cutoff.per_mode(8))
    real = su11_hp(basis, 2.5)
    k0 = real.op("K0")
    vac = basis_state(basis, (0,))
    out = k0 @ vac
    assert abs(out.amplitude((0,)) - 1.25) < 1e-14


def test_su2_hp_two_level_block():
    # M = 1 restricts the ladder to a single excitation: a Pauli-type block
    basis = enumerate_basis(1, Cutoff.per_mode(1))
    real = su2_hp(basis, 1)
    jp = real.op("J+").matrix
    jm = real.op("J-").matrix
    np.testing.assert_allclose(jp, np.array([[0, 0], [1, 0]], dtype=complex), atol=1e-15)
    np.testing.assert_allclose(jm, jp.conj().T, atol=0)
    comm = jp @ jm - jm @ jp
    np.testing.assert_allclose(comm, np.diag([-1.0, 1.0]), atol=1e-15)


def test_su2_relations():
    basis = enumerate_basis(2, Cutoff.total(8))
    reports = verify_algebra(su2_bilinear(basis, 5))
    assert _worst(reports) < 1e-12
    reduced = enumerate_basis(1, Cutoff.per_mode(5))
    reports = verify_algebra(su2_hp(reduced, 5))
    assert _worst(reports) < 1e-12


def test_su2_hp_ladder_annihilates_top():
    basis = enumerate_basis(1, Cutoff.per_mode(3))
    real = su2_hp(basis, 3)
    top = real.op("J+") @ basis_state(basis, (3,))
    assert top.norm() == 0.0


def test_rank_two_noncompact_relations():
    basis = enumerate_basis(3, Cutoff.total(8))
    reports = verify_algebra(su_r1_bilinear(basis, 2.0))
    assert _worst(reports) < 1e-12
    reduced = enumerate_basis(2, Cutoff.total(6))
    reports = verify_algebra(su_r1_hp(reduced, 2.0))
    assert _worst(reports) < 1e-12


def test_rank_two_compact_relations():
    basis = enumerate_basis(3, Cutoff.shell(3))
    reports = verify_algebra(su_rp1_bilinear(basis, 3))
    assert _worst(reports) < 1e-12
    reduced = enumerate_basis(2, Cutoff.total(3))
    reports = verify_algebra(su_rp1_hp(reduced, 3))
    assert _worst(reports) < 1e-12


def test_relation_reports_are_json_ready():
    basis = enumerate_basis(1, Cutoff.per_mode(6))
    reports = verify_algebra(su11_hp(basis, 2.0))
    text = json.dumps(reports)
    assert "max_residual" in text


def test_relations_listing_nonempty():
    basis = enumerate_basis(1, Cutoff.per_mode(4))
    real = su11_hp(basis, 1.0)
    rels = relations_for(real)
    assert len(rels) >= 3


def test_corrupted_generator_fails_loudly():
    # negative control: breaking one matrix entry must blow up the residual
    basis = enumerate_basis(1, Cutoff.per_mode(10))
    real = su11_hp(basis, 2.0)
    real.op("K+").matrix[3, 2] *= 1.5
    reports = verify_algebra(real)
    assert _worst(reports) > 0.1


def test_constraint_subspace_round_trip():
    parent = enumerate_basis(2, Cutoff.total(12))
    reduced = enumerate_basis(1, Cutoff.per_mode(5))
    sub = ConstraintSubspace(parent, reduced, M=3, kind="su_r1")
    for occ in reduced.states:
        embedded = sub.embed(occ)
        assert sub.project(embedded) == occ
    # embedding for the difference constraint pins n0 - n1 = M - 1
    emb = sub.embed((2,))
    assert emb[0] - emb[1] == 2  # M - 1 with M = 3


def test_intertwining_noncompact():
    M = 3
    reduced = enumerate_basis(1, Cutoff.per_mode(5))
    parent = enumerate_basis(2, Cutoff.total(M - 1 + 2 * 5))
    sub = ConstraintSubspace(parent, reduced, M=M, kind="su_r1")
    reports = intertwining_check(su11_bilinear(parent, float(M)), su11_hp(reduced, float(M)), sub)
    assert reports
    assert _worst(reports) <= 1e-12


def test_intertwining_compact_shell():
    M = 3
    reduced = enumerate_basis(2, Cutoff.total(M))
    parent = enumerate_basis(3, Cutoff.shell(M))
    sub = ConstraintSubspace(parent, reduced, M=M, kind="su_rp1")
    reports = intertwining_check(su_rp1_bilinear(parent, M), su_rp1_hp(reduced, M), sub)
    assert _worst(reports) <= 1e-12


def test_intertwining_rank_two_noncompact():
    M = 2
    reduced = enumerate_basis(2, Cutoff.total(5))
    parent = enumerate_basis(3, Cutoff.total(M - 1 + 10))
    sub = ConstraintSubspace(parent, reduced, M=M, kind="su_r1")
    reports = intertwining_check(su_r1_bilinear(parent, float(M)), su_r1_hp(reduced, float(M)), sub)
    assert _worst(reports) <= 1e-12


def test_compact_reduced_realization_rejects_wrong_simplex():
    basis = enumerate_basis(2, Cutoff.total(2))  # 6 states, not the 10 of total <= 3
    with pytest.raises(ValueError):
        su_rp1_hp(basis, 3)


def test_labels_cover_rank():
    basis = enumerate_basis(2, Cutoff.total(4))
    real = su_r1_hp(basis, 1.5)
    # r = 2 noncompact set: 2 raising, 2 lowering, 2 mixing, 3 diagonal
    assert real.rank == 2
    for lbl in ("K+1", "K+2", "K-1", "K-2", "N1", "N2", "N0"):
        assert lbl in real.labels

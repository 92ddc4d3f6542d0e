import numpy as np
import pytest
import scipy.linalg

from fockbench.fock import (
    Cutoff,
    LinearOperator,
    annihilation_op,
    apply_exponential,
    basis_state,
    commutator,
    creation_op,
    enumerate_basis,
    fidelity,
    identity_op,
    inner,
    number_op,
    op_exponential,
    state_from_json_dict,
    state_to_json_dict,
    total_number_op,
    vacuum_state,
)


def test_enumeration_order_two_modes_total_two():
    basis = enumerate_basis(2, Cutoff.total(2))
    assert basis.states == ((0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0))


def test_enumeration_sizes():
    assert len(enumerate_basis(1, Cutoff.per_mode(7))) == 8
    assert len(enumerate_basis(2, Cutoff.per_mode(3))) == 16
    # shell of 3 modes with total 3: C(5,2) = 10
    assert len(enumerate_basis(3, Cutoff.shell(3))) == 10
    # total cutoff of 3 modes: C(3+M, 3) summed grades
    assert len(enumerate_basis(3, Cutoff.total(4))) == 35


def test_enumeration_grading():
    basis = enumerate_basis(3, Cutoff.total(5))
    totals = basis.totals
    assert np.all(np.diff(totals) >= 0)  # grades never decrease
    shell = enumerate_basis(3, Cutoff.shell(4))
    assert np.all(shell.totals == 4)


def test_index_round_trip():
    basis = enumerate_basis(2, Cutoff.total(6))
    for i, occ in enumerate(basis.states):
        assert basis.index_of(occ) == i
        assert basis.contains(occ)
    assert not basis.contains((7, 0))
    with pytest.raises(ValueError):
        basis.index_of((7, 0))


def test_state_cap_enforced():
    with pytest.raises(ValueError):
        enumerate_basis(2, Cutoff.per_mode(9), max_states=50)


def test_ladder_actions():
    basis = enumerate_basis(1, Cutoff.per_mode(5))
    raise_ = creation_op(basis, 0)
    lower = annihilation_op(basis, 0)
    for n in range(5):
        up = raise_ @ basis_state(basis, (n,))
        assert abs(up.amplitude((n + 1,)) - np.sqrt(n + 1)) < 1e-15
    for n in range(1, 6):
        down = lower @ basis_state(basis, (n,))
        assert abs(down.amplitude((n - 1,)) - np.sqrt(n)) < 1e-15
    # out-of-basis target is dropped, not wrapped
    top = raise_ @ basis_state(basis, (5,))
    assert top.norm() == 0.0


def test_annihilation_is_exact_adjoint():
    basis = enumerate_basis(2, Cutoff.total(5))
    for mode in range(2):
        a = annihilation_op(basis, mode)
        adag = creation_op(basis, mode)
        assert np.array_equal(a.matrix, adag.matrix.conj().T)


def test_commutator_identity_on_interior():
    basis = enumerate_basis(2, Cutoff.per_mode(6))
    comm = commutator(annihilation_op(basis, 0), creation_op(basis, 0))
    for occ in basis.states:
        if occ[0] < 6:  # interior in the acted mode
            out = comm @ basis_state(basis, occ)
            assert abs(out.amplitude(occ) - 1.0) < 1e-14


def test_cross_mode_commutators_vanish():
    basis = enumerate_basis(2, Cutoff.per_mode(4))
    c = commutator(annihilation_op(basis, 0), creation_op(basis, 1))
    assert np.max(np.abs(c.matrix)) == 0.0


def test_number_operators():
    basis = enumerate_basis(2, Cutoff.total(4))
    n0 = number_op(basis, 0)
    ntot = total_number_op(basis)
    for occ in basis.states:
        psi = basis_state(basis, occ)
        assert abs((n0 @ psi).amplitude(occ) - occ[0]) < 1e-15
        assert abs((ntot @ psi).amplitude(occ) - sum(occ)) < 1e-15


def test_op_exponential_matches_scipy():
    rng = np.random.default_rng(11)
    basis = enumerate_basis(1, Cutoff.per_mode(11))
    d = len(basis)
    mat = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    mat *= 2.0 / np.linalg.norm(mat, 1)
    ours = op_exponential(LinearOperator(basis, mat), tol=1e-14).matrix
    ref = scipy.linalg.expm(mat)
    np.testing.assert_allclose(ours, ref, rtol=0, atol=1e-12)


def test_op_exponential_inverse_pair():
    rng = np.random.default_rng(5)
    basis = enumerate_basis(1, Cutoff.per_mode(9))
    d = len(basis)
    mat = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    mat *= 4.5 / np.linalg.norm(mat, 1)
    fwd = op_exponential(LinearOperator(basis, mat))
    back = op_exponential(LinearOperator(basis, -mat))
    resid = np.max(np.abs((fwd @ back).matrix - np.eye(d)))
    assert resid < 1e-11


def test_op_exponential_zero_is_identity():
    basis = enumerate_basis(2, Cutoff.total(3))
    out = op_exponential(LinearOperator(basis, np.zeros((len(basis), len(basis)))))
    assert np.array_equal(out.matrix, np.eye(len(basis)))


def test_op_exponential_nilpotent_terminates_exactly():
    # creation operator is strictly lower triangular in grading order, so the
    # series is finite and the exact path must reproduce it with no roundoff
    basis = enumerate_basis(1, Cutoff.per_mode(4))
    adag = creation_op(basis, 0)
    out = op_exponential(adag)
    expect = np.eye(len(basis), dtype=complex)
    power = np.eye(len(basis), dtype=complex)
    fact = 1.0
    for k in range(1, 6):
        power = adag.matrix @ power
        fact *= k
        expect += power / fact
    np.testing.assert_allclose(out.matrix, expect, rtol=0, atol=1e-15)


def test_apply_exponential_matches_matrix_route():
    rng = np.random.default_rng(23)
    basis = enumerate_basis(2, Cutoff.total(6))
    d = len(basis)
    mat = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    mat *= 3.0 / np.linalg.norm(mat, 1)
    op = LinearOperator(basis, mat)
    psi = vacuum_state(basis)
    via_vec = apply_exponential(op, psi, tol=1e-14)
    via_mat = op_exponential(op, tol=1e-14) @ psi
    np.testing.assert_allclose(via_vec.amplitudes, via_mat.amplitudes, rtol=0, atol=1e-12)


def test_state_vector_normalization_and_inner():
    basis = enumerate_basis(1, Cutoff.per_mode(3))
    a = basis_state(basis, (1,))
    b = basis_state(basis, (2,))
    combo = type(a)(basis, a.amplitudes + 1j * b.amplitudes)
    assert abs(combo.norm2() - 2.0) < 1e-15
    unit = combo.normalized()
    assert abs(unit.norm() - 1.0) < 1e-15
    assert abs(inner(a, combo) - 1.0) < 1e-15
    assert abs(inner(b, combo) - (-1j) * -1) < 1e-15  # vdot conjugates the left


def test_fidelity_bounds_and_errors():
    basis = enumerate_basis(1, Cutoff.per_mode(3))
    a = basis_state(basis, (0,))
    assert fidelity(a, a) == pytest.approx(1.0, abs=1e-15)
    zero = a.copy()
    zero.amplitudes[:] = 0
    with pytest.raises(ValueError):
        fidelity(a, zero)


def test_adjoint_involution_exact():
    basis = enumerate_basis(2, Cutoff.total(3))
    op = creation_op(basis, 1)
    assert np.array_equal(op.adjoint().adjoint().matrix, op.matrix)


def test_operator_shape_validation():
    basis = enumerate_basis(1, Cutoff.per_mode(2))
    with pytest.raises(ValueError):
        LinearOperator(basis, np.zeros((2, 2)))


def test_serialization_round_trip():
    basis = enumerate_basis(2, Cutoff.total(3))
    rng = np.random.default_rng(3)
    psi = vacuum_state(basis)
    psi.amplitudes[:] = rng.normal(size=len(basis)) + 1j * rng.normal(size=len(basis))
    d = state_to_json_dict(psi)
    assert d["schema"] == "fockbench.state/1"
    back = state_from_json_dict(d)
    assert back.basis.states == basis.states
    np.testing.assert_allclose(back.amplitudes, psi.amplitudes, rtol=0, atol=0)


def test_cutoff_json_round_trip():
    for cut in (Cutoff.per_mode(5), Cutoff.total(7), Cutoff.shell(2)):
        assert Cutoff.from_json_dict(cut.to_json_dict()) == cut


def test_identity_op_is_identity():
    basis = enumerate_basis(2, Cutoff.per_mode(2))
    psi = basis_state(basis, (1, 2))
    out = identity_op(basis) @ psi
    assert np.array_equal(out.amplitudes, psi.amplitudes)

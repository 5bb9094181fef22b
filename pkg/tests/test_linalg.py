import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from advised_automata.linalg import (TOL, HaltingTriple, LinalgError, Measurement, Projection,
                                     T_word, as_matrix, as_vector, basis, block_diag,
                                     hat_T_apply, hat_T_word, is_unitary, mat_apply, norm_sq,
                                     permutation_matrix, random_state, random_unitary,
                                     transition_op, unitarity_defect)


def test_as_matrix_accepts_re_im_pairs():
    m = as_matrix([[[0, 1], [1, 0]], [[0, 0], [0, -1]]])
    assert_allclose(m, [[1j, 1], [0, -1j]])


def test_as_matrix_unitary_flag_rejects_non_unitary():
    with pytest.raises(LinalgError):
        as_matrix([[1, 1], [0, 1]], unitary=True)
    with pytest.raises(LinalgError):
        as_matrix([[np.nan]])


def test_as_vector_normalization_check():
    with pytest.raises(LinalgError):
        as_vector([1, 1], normalized=True)
    assert_allclose(as_vector([0.6, 0.8j], normalized=True), [0.6, 0.8j])


def test_permutation_matrix_sends_column_j_to_perm_j():
    perm = [2, 0, 1]
    p = permutation_matrix(perm)
    for j, t in enumerate(perm):
        assert_allclose(p @ basis(3, j), basis(3, t))
    assert is_unitary(p)


def test_block_diag_layout():
    b = block_diag(np.array([[0, 1], [1, 0]]), np.array([[1j]]))
    assert_allclose(b, [[0, 1, 0], [1, 0, 0], [0, 0, 1j]])


@settings(max_examples=30, deadline=None)
@given(dim=st.integers(1, 8), seed=st.integers(0, 2 ** 32 - 1))
def test_random_unitary_is_unitary(dim, seed):
    u = random_unitary(dim, np.random.default_rng(seed))
    assert unitarity_defect(u) < TOL


def test_mat_apply_dimension_mismatch():
    with pytest.raises(LinalgError):
        mat_apply(np.eye(2), np.ones(3))


def test_measurement_partition():
    meas = Measurement.from_sets(4, [1], [3])
    meas.check_partition()
    assert sorted(meas.non.indices) == [0, 2]
    with pytest.raises(LinalgError):
        Measurement.from_sets(3, [0], [0])


def test_projection_matrix_is_idempotent():
    p = Projection(4, [0, 2]).matrix()
    assert_allclose(p @ p, p)
    assert_allclose(np.diag(p), [1, 0, 1, 0])


@settings(max_examples=40, deadline=None)
@given(dim=st.integers(2, 7), seed=st.integers(0, 2 ** 32 - 1))
def test_transition_op_conserves_mass(dim, seed):
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, 3, dim)
    meas = Measurement.from_sets(dim, np.flatnonzero(labels == 1), np.flatnonzero(labels == 2))
    v = random_state(dim, rng)
    res, pa, pr = transition_op(random_unitary(dim, rng), meas, v)
    assert abs(norm_sq(res) + pa + pr - norm_sq(v)) < TOL
    assert np.all(res[labels != 0] == 0)


def test_transition_op_requires_unitary():
    meas = Measurement.from_sets(2, [1], [])
    with pytest.raises(LinalgError):
        transition_op(np.array([[1, 1], [0, 1]]), meas, basis(2, 0))


def test_halting_triple_norm():
    psi = HaltingTriple(np.array([0.6, 0.8j]), 0.25, -0.5)
    assert abs(psi.norm() - np.sqrt(1 + 0.25 + 0.5)) < 1e-15
    assert_allclose((psi - psi).norm(), 0)
    assert abs(psi.distance(HaltingTriple(np.zeros(2))) - psi.norm()) < 1e-15


def test_hat_t_word_is_a_fold_and_matches_t_word(rng):
    meas = Measurement.from_sets(4, [2], [3])
    us = [random_unitary(4, rng) for _ in range(5)]
    psi = HaltingTriple(basis(4, 0))
    out = hat_T_word(us, meas, psi)
    step = psi
    for u in us:
        step = hat_T_apply(u, meas, step)
    assert_allclose(out.phi, step.phi)
    assert_allclose(out.phi, T_word(us, meas, psi.phi))
    assert abs(out.norm() - 1) < TOL


def test_no_halting_states_gives_unitary_evolution(rng):
    meas = Measurement.from_sets(3, [], [])
    us = [random_unitary(3, rng) for _ in range(4)]
    v = random_state(3, rng)
    out = hat_T_word(us, meas, HaltingTriple(v))
    assert_allclose(out.phi, us[3] @ us[2] @ us[1] @ us[0] @ v)
    assert out.gamma_acc == 0 and out.gamma_rej == 0

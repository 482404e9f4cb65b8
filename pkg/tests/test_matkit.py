import mpmath as mp
import numpy as np
import pytest

from azrenyi.errors import NotHermitian, NotPositive, QuadratureNotConverged, SpectrumOnCut
from azrenyi.matkit import (QuadratureConfig, direct_sum, graded_log_singular_values,
                            jacobi_singular_values, leading_principal_minors, loewner_leq,
                            matrix_exp, matrix_log, matrix_power_integral, matrix_power_spectral,
                            psd_eigh, ref_pivot_columns, spectral_decompose, support_projector,
                            tensor_product)
from azrenyi.states import random_positive, random_unitary


def mp_power(A, p, dps=40):
    # independent oracle: mpmath eigendecomposition at high precision
    with mp.workdps(dps):
        M = mp.matrix(A.tolist())
        E, Q = mp.eighe(M)
        D = mp.diag([e ** p if e > 0 else 0 for e in E])
        R = Q * D * Q.transpose_conj()
        return np.array(R.tolist(), dtype=complex)


def test_spectral_descending_and_reconstructs():
    A = random_positive(5, seed=1)
    dec = spectral_decompose(A)
    assert np.all(np.diff(dec.eigenvalues) <= 0)
    assert np.abs(dec.reconstruct() - A).max() < 1e-12


def test_spectral_phase_fixed():
    dec = spectral_decompose(random_positive(4, seed=2))
    for k in range(4):
        v = dec.eigenvectors[:, k]
        first = v[np.flatnonzero(np.abs(v) > 1e-10)[0]]
        assert abs(first.imag) < 1e-14 and first.real > 0


def test_spectral_tie_order_is_deterministic():
    U = random_unitary(4, seed=3)
    A = U @ np.diag([2.0, 1.0, 1.0, 0.5]) @ U.conj().T
    d1, d2 = spectral_decompose(A), spectral_decompose(A.copy())
    assert np.array_equal(d1.eigenvectors, d2.eigenvectors)
    # inside the tie, vectors come in descending lexicographic order of (re, im) entries
    key = lambda v: tuple(np.round(np.column_stack([v.real, v.imag]).ravel(), 10))
    assert key(d1.eigenvectors[:, 1]) >= key(d1.eigenvectors[:, 2])


def test_not_hermitian():
    with pytest.raises(NotHermitian):
        spectral_decompose(np.array([[1, 2], [0, 1.0]]))


def test_psd_eigh_clamps_and_rejects():
    w, _, _ = psd_eigh(np.diag([1.0, 1e-18, 0.0]))
    assert w[1] == 0 and w[2] == 0
    with pytest.raises(NotPositive):
        psd_eigh(np.diag([1.0, -0.1]))


@pytest.mark.parametrize("p", [0.5, -0.5, 1.7, 0.0])
def test_spectral_power_vs_mpmath(p):
    A = random_positive(4, seed=11)
    assert np.abs(matrix_power_spectral(A, p) - mp_power(A, p)).max() < 1e-10


def test_power_pseudo_inverse_convention():
    A = np.diag([4.0, 0.0])
    assert np.allclose(matrix_power_spectral(A, -1), np.diag([0.25, 0]))
    assert np.allclose(matrix_power_spectral(A, 0), np.diag([1.0, 0]))


def test_integral_scalar():
    assert abs(matrix_power_integral(np.array([[4.0]]), 0.5)[0, 0] - 2) < 1e-10


@pytest.mark.parametrize("p", [0.1, 0.5, 0.9])
def test_integral_matches_spectral(p):
    A = random_positive(5, seed=int(10 * p))
    assert np.abs(matrix_power_integral(A, p) - matrix_power_spectral(A, p)).max() < 1e-8


def test_integral_non_normal_matches_scalar_powers():
    # upper triangular: diagonal of C^p is the scalar powers of the diagonal
    C = np.array([[1 + 1j, 2.0], [0, 3 - 0.5j]])
    P = matrix_power_integral(C, 0.3)
    assert abs(P[0, 0] - (1 + 1j) ** 0.3) < 1e-9
    assert abs(P[1, 1] - (3 - 0.5j) ** 0.3) < 1e-9
    # P commutes with C and (C^0.5)^2 = C
    H = matrix_power_integral(C, 0.5)
    assert np.abs(H @ H - C).max() < 1e-8


def test_integral_errors():
    with pytest.raises(SpectrumOnCut):
        matrix_power_integral(np.diag([1.0, -1.0]), 0.5)
    with pytest.raises(ValueError):
        matrix_power_integral(np.eye(2), 1.5)
    with pytest.raises(QuadratureNotConverged):
        matrix_power_integral(np.eye(2), 0.5, QuadratureConfig(max_level=0, target_err=1e-15))


def test_log_exp_roundtrip():
    A = random_positive(3, seed=5, shift=0.1)
    assert np.abs(matrix_exp(matrix_log(A)) - A).max() < 1e-11
    assert np.allclose(matrix_log(np.diag([4.0, 1.0]), base=2), np.diag([2.0, 0.0]))


def test_support_projector():
    v = np.array([1, 1j, 0]) / np.sqrt(2)
    P = support_projector(np.outer(v, v.conj()))
    assert np.abs(P - np.outer(v, v.conj())).max() < 1e-14


def test_minors():
    X = np.array([[2, 1, 0], [1, 3, 1], [0, 1, 4.0]])
    assert np.allclose(leading_principal_minors(X), [2, 5, 18])


def test_ref_pivots():
    M = np.array([[1, 1, 1, 1], [1, 1, -1, -1.0]])
    assert ref_pivot_columns(M) == [0, 2]
    assert ref_pivot_columns(np.zeros((2, 3))) == []
    assert ref_pivot_columns(np.array([[0, 2, 4], [0, 1, 2.0]])) == [1]


def test_direct_sum_and_tensor():
    A, B = np.eye(2), 2 * np.eye(1)
    assert np.allclose(direct_sum(A, B), np.diag([1, 1, 2]))
    assert tensor_product(np.diag([1, 2]), np.diag([3, 4])).shape == (4, 4)


def test_loewner():
    assert loewner_leq(np.eye(2), 2 * np.eye(2))
    assert not loewner_leq(np.diag([1, 3.0]), 2 * np.eye(2))


def test_jacobi_matches_svd():
    G = np.random.default_rng(0).normal(size=(4, 4)) + 0j
    assert np.allclose(jacobi_singular_values(G), np.linalg.svd(G, compute_uv=False))


def test_graded_vs_mpmath():
    rng = np.random.default_rng(4)
    Y = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    log_d = np.array([0.0, -50.0, -120.0, -400.0])
    got = graded_log_singular_values(Y, log_d)
    with mp.workdps(400):
        M = mp.matrix(Y.tolist()) * mp.diag([mp.exp(x) for x in log_d])
        ref = sorted((float(mp.log(s)) for s in mp.svd_c(M, compute_uv=False)), reverse=True)
    assert np.allclose(got, ref, rtol=0, atol=1e-9)


def test_graded_rank_deficient():
    Y = np.array([[1, 1, 0], [0, 0, 1.0], [0, 0, 0]])
    assert len(graded_log_singular_values(Y, [0.0, -5.0, -900.0])) == 2

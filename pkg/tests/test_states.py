import numpy as np
import pytest

from azrenyi.states import (RandomSpec, commutes, derive_seed, fidelity, is_density, pure_state,
                            random_density, random_isometry, random_positive, random_unitary, stream)


def test_unitary_is_unitary():
    U = random_unitary(5, seed=1)
    assert np.abs(U.conj().T @ U - np.eye(5)).max() < 1e-12


def test_isometry():
    V = random_isometry(2, 6, seed=2)
    assert V.shape == (6, 2)
    assert np.abs(V.conj().T @ V - np.eye(2)).max() < 1e-12
    with pytest.raises(ValueError):
        random_isometry(3, 2)


def test_haar_first_moment():
    # E[U X U*] = tr(X) I/d under the Haar measure
    rng = stream(9)
    X = np.diag([1.0, 0.0])
    acc = np.zeros((2, 2), complex)
    n = 4000
    for _ in range(n):
        U = random_unitary(2, rng)
        acc += U @ X @ U.conj().T
    assert np.abs(acc / n - np.eye(2) / 2).max() < 3 * 0.5 / np.sqrt(n)


def test_density_properties():
    rho = random_density(RandomSpec(4, 2, 3))
    assert is_density(rho)
    assert np.linalg.matrix_rank(rho, tol=1e-10) == 2


def test_seeds_reproducible():
    assert np.array_equal(random_density(3, 5), random_density(3, 5))
    assert not np.array_equal(random_density(3, 5), random_density(3, 6))
    assert derive_seed(1, 2) == derive_seed(1, 2) != derive_seed(1, 3)


def test_random_spec_rejects_bad_dim_and_rank():
    with pytest.raises(ValueError):
        RandomSpec(3, 4)
    with pytest.raises(ValueError):
        RandomSpec(0)


def test_fidelity():
    rho = random_density(3, 1)
    assert abs(fidelity(rho, rho) - 1) < 1e-10
    assert abs(fidelity(pure_state([1, 0]), np.eye(2) / 2) - np.sqrt(0.5)) < 1e-12
    # pure states: |<a|b>|
    a, b = np.array([1, 1j]) / np.sqrt(2), np.array([1, 0])
    assert abs(fidelity(pure_state(a), pure_state(b)) - 1 / np.sqrt(2)) < 1e-7


def test_commutes():
    assert commutes(np.diag([1, 2.0]), np.diag([3, 4.0]))
    assert not commutes(np.diag([1, 2.0]), np.array([[0, 1], [1, 0.0]]))


def test_random_positive_shift():
    A = random_positive(3, seed=0, shift=1.0)
    assert np.linalg.eigvalsh(A)[0] >= 1 - 1e-12

"""Density operators, Haar-random sampling, fidelity and commutation tests.

Random draws go through numpy's PCG64 generator.  Every sampler takes an
integer seed (or an existing ``Generator``); :func:`stream` derives an
independent, reproducible child stream from ``(seed, *counters)`` so that
parallel workers never share generator state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .matkit import as_matrix, matrix_power_spectral

GENERATOR = "numpy.random.PCG64/SeedSequence v1"


def stream(seed: int, *counters: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), *map(int, counters)])))


def derive_seed(seed: int, *counters: int) -> int:
    """A 64-bit seed for the child stream ``(seed, *counters)``."""
    ss = np.random.SeedSequence([int(seed), *map(int, counters)])
    return int(ss.generate_state(1, np.uint64)[0])


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return stream(seed)


@dataclass(frozen=True)
class RandomSpec:
    dim: int
    rank: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be positive")
        if self.rank is not None and not 1 <= self.rank <= self.dim:
            raise ValueError("rank must lie in [1, dim]")


def ginibre(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def random_unitary(dim: int, seed=0) -> np.ndarray:
    """Haar-distributed unitary via QR of a Ginibre matrix with phase correction."""
    if dim < 1:
        raise ValueError("dim must be positive")
    Z = ginibre(dim, dim, _rng(seed))
    Q, R = np.linalg.qr(Z)
    ph = np.diagonal(R) / np.abs(np.diagonal(R))
    return Q * ph


def random_isometry(d_in: int, d_out: int, seed=0) -> np.ndarray:
    if d_out < d_in:
        raise ValueError("an isometry needs d_out >= d_in")
    return random_unitary(d_out, seed)[:, :d_in]


def random_density(spec: RandomSpec | int, seed=None) -> np.ndarray:
    """rho = W W* / tr(W W*) with W a dim x rank complex Gaussian matrix.

    Accepts a :class:`RandomSpec`, or ``random_density(dim, seed)`` for the
    full-rank case.
    """
    if not isinstance(spec, RandomSpec):
        spec = RandomSpec(int(spec))
    rng = _rng(spec.seed if seed is None else seed)
    rank = spec.rank or spec.dim
    W = ginibre(spec.dim, rank, rng)
    rho = W @ W.conj().T
    rho = (rho + rho.conj().T) / 2
    return rho / np.trace(rho).real


def random_positive(dim: int, seed=0, shift: float = 0.0) -> np.ndarray:
    """Unnormalized positive definite matrix W W*/dim + shift*I."""
    W = ginibre(dim, dim, _rng(seed))
    A = W @ W.conj().T / dim + shift * np.eye(dim)
    return (A + A.conj().T) / 2


def is_density(rho, tol: float = 1e-12) -> bool:
    rho = as_matrix(rho)
    if abs(np.trace(rho).real - 1) > tol or np.max(np.abs(rho - rho.conj().T)) > tol:
        return False
    return bool(np.linalg.eigvalsh((rho + rho.conj().T) / 2)[0] >= -tol)


def fidelity(rho, sigma) -> float:
    """Trace norm of sqrt(rho) sqrt(sigma)."""
    X = matrix_power_spectral(rho, 0.5) @ matrix_power_spectral(sigma, 0.5)
    return float(np.sum(np.linalg.svd(X, compute_uv=False)))


def commutes(A, B, tol: float = 1e-10) -> bool:
    A, B = as_matrix(A), as_matrix(B)
    scale = np.linalg.norm(A, 2) * np.linalg.norm(B, 2)
    return bool(np.linalg.norm(A @ B - B @ A, 2) <= tol * scale)


def pure_state(vec) -> np.ndarray:
    v = np.asarray(vec, dtype=complex).ravel()
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())

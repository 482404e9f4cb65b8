"""Closed-form limits of D_{alpha,z}.

* alpha -> 1 along z = r (alpha - 1): relative entropy of rho against a
  matrix built from leading principal minors of sigma^(-1/r) in the
  eigenbasis of rho (:func:`limit_alpha1`).
* alpha -> +/- infinity along the same lines: scaled max-relative entropies.
* alpha = z -> 0: a sum of sigma eigenvalues selected by row-echelon pivots.

The minor construction and the infinite-alpha formulas assume z = r (alpha-1)
is positive.  Because D_{alpha,z} is even in z, the other side of a limit is
obtained by flipping the sign of r; the functions take a ``side`` argument for
that (see :func:`limit_alpha1`).

sigma is compressed to its support first, so singular sigma is accepted
whenever supp rho lies inside supp sigma.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .divergence import LN2, _compress, d_max
from .errors import SigmaNotPositiveDefinite, SupportMismatch, Unsupported
from .matkit import as_matrix, psd_eigh, ref_pivot_columns, spectral_decompose, support_basis

DEGENERACY_GAP = 1e-10


@dataclass(frozen=True)
class MinorVector:
    """nu_k = det((sigma^(-1/r))[:k, :k])^(-r) in the ordered eigenbasis of rho."""

    log_nu: np.ndarray
    basis: np.ndarray
    mu: np.ndarray

    @property
    def nu(self) -> np.ndarray:
        return np.exp(self.log_nu)

    def sigma_hat(self) -> "SigmaHat":
        diag = np.exp(np.diff(np.concatenate([[0.0], self.log_nu])))
        return SigmaHat(diag, self.basis)


@dataclass(frozen=True)
class SigmaHat:
    """(nu_1, nu_2/nu_1, ..., nu_d/nu_{d-1}) as a diagonal in the rho eigenbasis."""

    diag_values: np.ndarray
    basis: np.ndarray

    def matrix(self) -> np.ndarray:
        B = self.basis
        return (B * self.diag_values) @ B.conj().T


def _state_check(rho_s):
    tr = float(np.trace(rho_s).real)
    if abs(tr - 1) > 1e-10:
        raise ValueError(f"rho must be a density operator (trace {tr:.12g})")


def _minor_vector_pd(rho_s, lam, r: float, basis=None) -> MinorVector:
    if r == 0:
        raise ValueError("r must be nonzero")
    if basis is None:
        dec = spectral_decompose(rho_s, tol_herm=1e-8)
        basis, mu = dec.eigenvectors, np.clip(dec.eigenvalues, 0, None)
    else:
        basis = as_matrix(basis)
        mu = np.real(np.einsum("ij,jk,ki->i", basis.conj().T, rho_s, basis))
        mu = np.clip(mu, 0, None)
    S = basis.conj().T @ np.diag(lam ** (-1 / r)) @ basis
    S = (S + S.conj().T) / 2
    log_m = np.empty(len(lam))
    for k in range(1, len(lam) + 1):
        sign, ld = np.linalg.slogdet(S[:k, :k])
        log_m[k - 1] = ld
    return MinorVector(-r * log_m, basis, mu)


def minor_vector(rho, sigma, r: float, basis=None) -> MinorVector:
    """Minor vector for positive definite sigma.

    ``basis`` optionally fixes the eigenbasis of rho (columns, ordered by
    non-increasing eigenvalue); by default the deterministic ordering of
    :func:`spectral_decompose` is used.
    """
    sigma = as_matrix(sigma)
    lam, V, _ = psd_eigh(sigma)
    if np.any(lam <= 0):
        raise SigmaNotPositiveDefinite("sigma must be positive definite")
    rho = as_matrix(rho)
    rho_s = V.conj().T @ rho @ V
    rho_s = (rho_s + rho_s.conj().T) / 2
    if basis is not None:
        basis = V.conj().T @ as_matrix(basis)
    mv = _minor_vector_pd(rho_s, lam, r, basis)
    return MinorVector(mv.log_nu, V @ mv.basis, mv.mu)


def _effective_r(r: float, side: int | None) -> float:
    if r == 0:
        raise ValueError("r must be nonzero")
    if side is None:
        return r
    if side not in (-1, 1):
        raise ValueError("side must be +1, -1 or None")
    return abs(r) * side


def limit_alpha1(rho, sigma, r: float, side: int | None = None, basis=None) -> float:
    """lim_{alpha -> 1} D_{alpha, r(alpha-1)}(rho || sigma), in bits.

    Evaluated as

        -S(rho) - mu_d log det sigma - sum_{i<d} (mu_i - mu_{i+1}) log nu_i,

    which is well defined for degenerate rho.  The formula holds on the side
    of alpha = 1 where z = r (alpha - 1) > 0; ``side=+1`` (alpha -> 1 from
    above) or ``side=-1`` (from below) selects a side explicitly, using
    evenness in z to map the other side onto slope -r.  ``side=None`` means
    the side on which the given r makes z positive.
    """
    rho_s, lam, Vs = _compress(rho, sigma, with_basis=True)
    _state_check(rho_s)
    if basis is not None:
        basis = Vs.conj().T @ as_matrix(basis)
    mv = _minor_vector_pd(rho_s, lam, _effective_r(r, side), basis)
    mu = mv.mu
    pos = mu > 0
    neg_entropy = float(np.sum(mu[pos] * np.log(mu[pos])))
    log_det = float(np.sum(np.log(lam)))
    val = neg_entropy - mu[-1] * log_det - float(np.sum((mu[:-1] - mu[1:]) * mv.log_nu[:-1]))
    return float(val / LN2)


def limit_alpha1_quotient(rho, sigma, r: float, side: int | None = None) -> float:
    """Same limit written as D(rho || sigma_hat) with sigma_hat from successive
    minor quotients.  Only meaningful for non-degenerate rho."""
    rho_s, lam = _compress(rho, sigma)
    _state_check(rho_s)
    mv = _minor_vector_pd(rho_s, lam, _effective_r(r, side))
    hat = mv.sigma_hat().diag_values
    mu = mv.mu
    pos = mu > 0
    return float(np.sum(mu[pos] * (np.log(mu[pos]) - np.log(hat[pos])))) / LN2


def _pow_diag_basis(rho_s, t: float):
    mu, U, _ = psd_eigh(rho_s)
    f = np.zeros_like(mu)
    f[mu > 0] = mu[mu > 0] ** t
    return (U * f) @ U.conj().T


def limit_alpha_inf(rho, sigma, r: float) -> float:
    """lim_{alpha -> +inf} D_{alpha, r(alpha-1)} = |r| D_max(rho^(1/|r|) || sigma^(1/|r|))."""
    rho_s, lam = _compress(rho, sigma)
    s = abs(_effective_r(r, 1))
    return float(s * d_max(_pow_diag_basis(rho_s, 1 / s), np.diag(lam ** (1 / s))))


def limit_alpha_neg_inf(rho, sigma, r: float) -> float:
    """lim_{alpha -> -inf} D_{alpha, r(alpha-1)} = -|r| D_max(sigma^(1/|r|) || rho^(1/|r|)).

    Needs supp rho = supp sigma.  For r = -1 this is -D_max(sigma || rho).
    """
    rho_s, lam = _compress(rho, sigma)
    mu, _, _ = psd_eigh(rho_s)
    if np.any(mu <= 0):
        raise SupportMismatch("supp(rho) must equal supp(sigma)")
    s = abs(_effective_r(r, -1))
    return float(-s * d_max(np.diag(lam ** (1 / s)), _pow_diag_basis(rho_s, 1 / s)))


@dataclass(frozen=True)
class ZeroZeroLimit:
    value: float          # the divergence, bits
    functional: float     # lim f_{alpha,alpha} = sum of selected sigma eigenvalues
    pivots: tuple[int, ...]   # 0-based indices into the descending sigma spectrum

    @property
    def pivots_1based(self) -> tuple[int, ...]:
        return tuple(i + 1 for i in self.pivots)


def zero_zero_functional(projector, U, lam, pivot_tol: float = 1e-10):
    """Sum of ``lam[i]`` over the REF pivot columns of (projector @ U) with
    all-zero rows removed.  Returns ``(sum, pivots)``."""
    rows = support_basis(projector).conj().T @ as_matrix(U)
    piv = ref_pivot_columns(rows, pivot_tol)
    lam = np.asarray(lam, dtype=float)
    return float(np.sum(lam[piv])), tuple(piv)


def limit_zero_zero(rho, sigma, pivot_tol: float = 1e-10) -> ZeroZeroLimit:
    """lim_{alpha -> 0+} D_{alpha,alpha}(rho || sigma).

    Only the support projector of rho enters.  sigma's eigenvectors are
    ordered by descending eigenvalue; with a degenerate spectrum any fixed
    eigenbasis gives the same sum.
    """
    rho_s, lam = _compress(rho, sigma)
    P = support_basis(rho_s)
    P = P @ P.conj().T
    total, piv = zero_zero_functional(P, np.eye(len(lam)), lam, pivot_tol)
    tr = float(np.trace(rho_s).real)
    return ZeroZeroLimit(-math.log2(total / tr), total, piv)


def limit_z0_fixed_alpha(*_args, **_kwargs):
    raise Unsupported("the z -> 0 limit at fixed alpha != 1 is not implemented")

"""Spectral calculus on small dense complex matrices.

Everything here works on plain ``numpy.ndarray`` values (complex128).  The
functions never mutate their inputs.

Two fractional-power backends are provided: :func:`matrix_power_spectral`
(eigendecomposition, PSD inputs) and :func:`matrix_power_integral`
(resolvent integral, any matrix whose spectrum avoids the negative real axis).
:func:`graded_log_singular_values` computes singular values of strongly
column-graded products to high relative accuracy; the divergence code relies
on it when exponents become very large.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NotHermitian, NotPositive, QuadratureNotConverged, SpectrumOnCut

EPS = np.finfo(float).eps

__all__ = [
    "SpectralDecomposition",
    "QuadratureConfig",
    "as_matrix",
    "hermitian_part",
    "spectral_decompose",
    "psd_eigh",
    "default_zero_tol",
    "matrix_power_spectral",
    "matrix_power_integral",
    "matrix_log",
    "matrix_exp",
    "support_projector",
    "support_basis",
    "leading_principal_minors",
    "ref_pivot_columns",
    "direct_sum",
    "tensor_product",
    "loewner_leq",
    "graded_log_singular_values",
    "jacobi_singular_values",
]


def as_matrix(X, square=True) -> np.ndarray:
    M = np.array(X, dtype=complex, copy=True)
    if M.ndim == 0:
        M = M.reshape(1, 1)
    if M.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {M.shape}")
    if square and M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    return M


def hermitian_part(X) -> np.ndarray:
    X = np.asarray(X, dtype=complex)
    return (X + X.conj().T) / 2


def _check_hermitian(H: np.ndarray, tol_herm: float) -> np.ndarray:
    scale = max(1.0, float(np.max(np.abs(H))) if H.size else 1.0)
    asym = float(np.max(np.abs(H - H.conj().T))) if H.size else 0.0
    if asym > tol_herm * scale:
        raise NotHermitian(f"matrix is not Hermitian: max |H - H*| = {asym:.3g}")
    return hermitian_part(H)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues sorted descending, eigenvectors as matching columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        U = self.eigenvectors
        return (U * self.eigenvalues) @ U.conj().T

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)


def _phase_fix(v: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(np.abs(v) > 1e-10 * max(np.linalg.norm(v), 1e-300))
    if len(nz) == 0:
        return v
    ph = v[nz[0]] / abs(v[nz[0]])
    return v / ph


def spectral_decompose(H, tol_herm: float = 1e-10) -> SpectralDecomposition:
    """Eigendecomposition of a Hermitian matrix with a deterministic ordering.

    Eigenvalues are returned in non-increasing order.  Each eigenvector is
    phase-fixed so that its first non-negligible entry is real positive, and
    within a group of (numerically) equal eigenvalues the vectors are ordered
    lexicographically by their phase-fixed entries.
    """
    H = _check_hermitian(as_matrix(H), tol_herm)
    w, V = np.linalg.eigh(H)
    w = w[::-1].copy()
    V = V[:, ::-1].copy()
    for k in range(V.shape[1]):
        V[:, k] = _phase_fix(V[:, k])
    tie = 1e-12 * max(1.0, float(np.max(np.abs(w))) if len(w) else 1.0)
    start = 0
    n = len(w)
    while start < n:
        stop = start + 1
        while stop < n and w[start] - w[stop] <= tie:
            stop += 1
        if stop - start > 1:
            keys = [
                tuple(np.round(np.column_stack([V[:, k].real, V[:, k].imag]).ravel(), 10))
                for k in range(start, stop)
            ]
            order = sorted(range(stop - start), key=lambda i: keys[i], reverse=True)
            V[:, start:stop] = V[:, start:stop][:, order]
        start = stop
    return SpectralDecomposition(w, V)


def default_zero_tol(eigenvalues, dim: int | None = None) -> float:
    """Numerical-rank threshold: dim * machine epsilon * largest |eigenvalue|."""
    ev = np.asarray(eigenvalues, dtype=float)
    if ev.size == 0:
        return 0.0
    d = dim if dim is not None else ev.size
    return d * EPS * float(np.max(np.abs(ev)))


def psd_eigh(A, zero_tol: float | None = None, tol_psd: float | None = None):
    """Eigendecomposition of a PSD operator with rounding noise clamped.

    Returns ``(eigenvalues, eigenvectors, zero_tol)``.  Eigenvalues at or below
    ``zero_tol`` are set to exactly 0.  An eigenvalue below ``-tol_psd`` means
    the input is not PSD and raises :class:`NotPositive`.
    """
    dec = spectral_decompose(A, tol_herm=1e-8)
    w = dec.eigenvalues.copy()
    top = float(np.max(np.abs(w))) if w.size else 0.0
    if zero_tol is None:
        zero_tol = default_zero_tol(w)
    if tol_psd is None:
        tol_psd = max(zero_tol, 1e-9 * top)
    if w.size and w[-1] < -tol_psd:
        raise NotPositive(f"operator has negative eigenvalue {w[-1]:.3g}")
    w[w <= zero_tol] = 0.0
    return w, dec.eigenvectors, zero_tol


def matrix_power_spectral(A, p: float, zero_tol: float | None = None) -> np.ndarray:
    """A**p by spectral calculus, taken on the support of A.

    Eigenvalues that are numerically zero map to zero for every exponent,
    including p <= 0 (pseudo-inverse convention).
    """
    w, U, _ = psd_eigh(A, zero_tol)
    f = np.zeros_like(w)
    pos = w > 0
    f[pos] = w[pos] ** p
    return (U * f) @ U.conj().T


@dataclass(frozen=True)
class QuadratureConfig:
    target_err: float = 1e-10
    eps_min: float = 1e-8
    max_level: int = 12
    u_max: float = 3.5


def _cut_distance(lam: np.ndarray) -> np.ndarray:
    return np.where(lam.real >= 0, np.abs(lam), np.abs(lam.imag))


def matrix_power_integral(C, p: float, quad: QuadratureConfig | None = None) -> np.ndarray:
    """Principal fractional power C**p for 0 < p < 1 from the resolvent integral

        C**p = sin(p pi)/pi * int_0^inf t**p (1/t - (t + C)**-1) dt.

    With ``t = exp(s)`` the integrand becomes ``exp(p s) (exp(s) + C)**-1 C``,
    which decays exponentially at both ends.  The s-range is truncated using
    resolvent norm bounds so each neglected tail is below target_err/4, and the
    remaining finite integral is evaluated with tanh-sinh quadrature, halving
    the step until successive levels agree to target_err.
    """
    quad = quad or QuadratureConfig()
    if not 0 < p < 1:
        raise ValueError("integral backend requires 0 < p < 1")
    C = as_matrix(C)
    d = C.shape[0]
    lam = np.linalg.eigvals(C)
    eps = float(np.min(_cut_distance(lam)))
    if eps < quad.eps_min:
        raise SpectrumOnCut(f"eigenvalue within {eps:.3g} of the negative real axis")
    tgt = quad.target_err
    norm_c = float(np.linalg.norm(C, 2))
    norm_cinv = float(np.linalg.norm(np.linalg.inv(C), 2))
    # resolvent bound ||(t + C)^-1|| <= 1/(t - gamma) for t > gamma
    gamma = max(0.0, -float(np.linalg.eigvalsh(hermitian_part(C))[0]))
    log_hi = max(0.0, math.log(2 * gamma) if gamma > 0 else 0.0,
                 math.log(8 * norm_c / ((1 - p) * tgt)) / (1 - p))
    # head: ||g|| <= t^(p-1) + 2 t^p ||C^-1|| for t < 1/(2||C^-1||)
    log_lo = min(0.0, -math.log(2 * norm_cinv), math.log(p * tgt / 8) / p)
    if log_hi > 700 or log_lo < -700:
        raise QuadratureNotConverged(f"p={p} needs an s-range beyond float range for target {tgt:.3g}")
    a, b = log_lo, log_hi
    half, mid = (b - a) / 2, (b + a) / 2
    eye = np.eye(d)

    def integrand(u: np.ndarray) -> np.ndarray:
        sh = np.pi / 2 * np.sinh(u)
        x = np.tanh(sh)
        w = np.pi / 2 * np.cosh(u) / np.cosh(sh) ** 2
        s = mid + half * x
        M = np.exp(s)[:, None, None] * eye + C
        vals = np.linalg.solve(M, np.broadcast_to(C, M.shape))
        vals *= (np.exp(p * s) * w * half)[:, None, None]
        return vals.sum(axis=0)

    h = 0.5
    n = int(math.ceil(quad.u_max / h))
    total = integrand(np.arange(-n, n + 1) * h)
    prev = total * h
    err = math.inf
    for _ in range(quad.max_level):
        h /= 2
        n = int(math.ceil(quad.u_max / h))
        odd = np.arange(-n + (1 if n % 2 == 0 else 0), n + 1, 2) * h
        total = total + integrand(odd)
        cur = total * h
        err = float(np.linalg.norm(cur - prev, 2))
        prev = cur
        if err <= tgt / math.sin(p * np.pi) * np.pi / 4:
            return math.sin(p * np.pi) / np.pi * cur
    raise QuadratureNotConverged(f"tanh-sinh error estimate {err:.3g} above target {tgt:.3g}")


def matrix_log(A, zero_tol: float | None = None, base: float | None = None) -> np.ndarray:
    """Logarithm of a PSD operator on its support (zero eigenvalues map to 0)."""
    w, U, _ = psd_eigh(A, zero_tol)
    f = np.zeros_like(w)
    pos = w > 0
    f[pos] = np.log(w[pos])
    if base is not None:
        f /= math.log(base)
    return (U * f) @ U.conj().T


def matrix_exp(H) -> np.ndarray:
    dec = spectral_decompose(H, tol_herm=1e-8)
    U = dec.eigenvectors
    return (U * np.exp(dec.eigenvalues)) @ U.conj().T


def support_basis(A, zero_tol: float | None = None) -> np.ndarray:
    """Orthonormal columns spanning the support of a PSD operator."""
    w, U, _ = psd_eigh(A, zero_tol)
    return U[:, w > 0]


def support_projector(A, zero_tol: float | None = None) -> np.ndarray:
    V = support_basis(A, zero_tol)
    return V @ V.conj().T


def leading_principal_minors(X) -> np.ndarray:
    X = as_matrix(X)
    return np.array([np.linalg.det(X[:k, :k]) for k in range(1, X.shape[0] + 1)], dtype=complex)


def ref_pivot_columns(M, pivot_tol: float = 1e-10) -> list[int]:
    """0-based column indices of the row leaders in a row-echelon form of M.

    Gaussian elimination with partial pivoting; an entry counts as zero when
    its modulus is below ``pivot_tol`` times the largest row max-norm of M.
    """
    R = as_matrix(M, square=False)
    rows, cols = R.shape
    scale = float(np.max(np.abs(R))) if R.size else 0.0
    thresh = pivot_tol * scale
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        k = r + int(np.argmax(np.abs(R[r:, c])))
        if abs(R[k, c]) <= thresh:
            continue
        if k != r:
            R[[r, k]] = R[[k, r]]
        R[r + 1:] -= np.outer(R[r + 1:, c] / R[r, c], R[r])
        R[r + 1:, c] = 0
        pivots.append(c)
        r += 1
    return pivots


def direct_sum(A, B) -> np.ndarray:
    A, B = as_matrix(A, square=False), as_matrix(B, square=False)
    out = np.zeros((A.shape[0] + B.shape[0], A.shape[1] + B.shape[1]), dtype=complex)
    out[: A.shape[0], : A.shape[1]] = A
    out[A.shape[0]:, A.shape[1]:] = B
    return out


def tensor_product(A, B) -> np.ndarray:
    """Kronecker product; entry (i*dimB + k, j*dimB + l) = A[i, j] * B[k, l]."""
    return np.kron(as_matrix(A, square=False), as_matrix(B, square=False))


def loewner_leq(A, B, tol: float = 1e-10) -> bool:
    A, B = as_matrix(A), as_matrix(B)
    if A.shape != B.shape:
        raise ValueError("dimension mismatch")
    return bool(np.linalg.eigvalsh(hermitian_part(B - A))[0] >= -tol)


# --- graded singular values -------------------------------------------------

def jacobi_singular_values(G) -> np.ndarray:
    """Singular values by one-sided (Hestenes) Jacobi, sorted descending.

    For column-scaled matrices ``Y @ diag(d)`` with well-conditioned ``Y`` the
    small singular values come out with high relative accuracy, which LAPACK's
    bidiagonal SVD does not guarantee.
    """
    G = np.array(G, dtype=complex, copy=True)
    n = G.shape[1]
    for _ in range(80):
        rotated = False
        for i in range(n - 1):
            for j in range(i + 1, n):
                gi, gj = G[:, i], G[:, j]
                a = float(np.vdot(gi, gi).real)
                b = float(np.vdot(gj, gj).real)
                g = np.vdot(gi, gj)
                ag = abs(g)
                if ag == 0.0 or ag <= 4 * EPS * math.sqrt(a) * math.sqrt(b):
                    continue
                if abs(b - a) > 1e150 * ag:
                    continue  # rotation angle below 1e-150
                rotated = True
                gj = gj * complex(g.real / ag, -g.imag / ag)
                zeta = (b - a) / (2 * ag)
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.hypot(1.0, zeta))
                c = 1 / math.hypot(1.0, t)
                s = c * t
                G[:, i], G[:, j] = c * gi - s * gj, s * gi + c * gj
        if not rotated:
            break
    return np.sort(np.linalg.norm(G, axis=0))[::-1]


_GAP = 36.0      # nats between pivot scales that decouples clusters
_SPAN = 300.0    # widest scale range handled inside one cluster
_FAST = 5.0      # below this total range a plain SVD is accurate enough


def graded_log_singular_values(Y, log_d, rank_tol: float = 1e-11) -> np.ndarray:
    """Natural logs of the nonzero singular values of ``Y @ diag(exp(log_d))``.

    ``log_d`` may span thousands of nats (entries that would underflow as
    floats).  Columns are processed in decreasing scale; a greedy
    Gram-Schmidt pass yields an upper staircase factor ``R`` whose pivot
    columns are exactly the row-echelon pivots of ``Y`` in that order.  Rows of
    ``R @ D`` whose pivot scales are separated by more than ``_GAP`` nats
    decouple up to a relative error of about exp(-_GAP); each cluster is then
    rescaled and handled with one-sided Jacobi.
    """
    Y = np.asarray(Y, dtype=complex)
    ld = np.asarray(log_d, dtype=float)
    keep = np.isfinite(ld)
    Y, ld = Y[:, keep], ld[keep]
    if ld.size == 0:
        return np.zeros(0)
    order = np.argsort(-ld, kind="stable")
    Y, ld = Y[:, order], ld[order]
    m, n = Y.shape
    Q = np.zeros((m, min(m, n)), dtype=complex)
    R = np.zeros((min(m, n), n), dtype=complex)
    pivots: list[int] = []
    col_scale = max(float(np.max(np.linalg.norm(Y, axis=0))), 1e-300)
    for j in range(n):
        v = Y[:, j].copy()
        k = len(pivots)
        for _ in range(2):
            if k:
                c = Q[:, :k].conj().T @ v
                R[:k, j] += c
                v -= Q[:, :k] @ c
        nv = float(np.linalg.norm(v))
        ref = max(float(np.linalg.norm(Y[:, j])), 1e-3 * col_scale)
        if k < Q.shape[1] and nv > rank_tol * ref:
            Q[:, k] = v / nv
            R[k, j] = nv
            pivots.append(j)
    s = len(pivots)
    if s == 0:
        return np.zeros(0)
    R = R[:s]
    if ld[0] - ld[-1] <= _FAST:
        sv = np.linalg.svd(R * np.exp(ld - ld[0]), compute_uv=False)
        return np.log(sv) + ld[0]
    out = []
    r0 = 0
    while r0 < s:
        r1 = r0
        while (r1 + 1 < s and ld[pivots[r1]] - ld[pivots[r1 + 1]] <= _GAP
               and ld[pivots[r0]] - ld[pivots[r1 + 1]] <= _SPAN):
            r1 += 1
        c0 = pivots[r0]
        c1 = pivots[r1 + 1] if r1 + 1 < s else n
        top = ld[c0]
        block = R[r0:r1 + 1, c0:c1] * np.exp(ld[c0:c1] - top)
        sv = jacobi_singular_values(block)[: r1 - r0 + 1]
        with np.errstate(divide="ignore"):
            out.append(np.log(sv) + top)
        r0 = r1 + 1
    return np.sort(np.concatenate(out))[::-1]

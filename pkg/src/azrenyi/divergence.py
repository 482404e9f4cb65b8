"""The alpha-z trace functional, the alpha-z relative Renyi entropy and its
named special cases.

All divergences are returned in bits.  Inputs are PSD matrices (numpy arrays);
``rho`` need not be normalized, in which case the functional is divided by
``tr rho`` before taking the logarithm.

Fractional powers are always taken on supports.  Everything is first
compressed onto ``supp sigma``; ``supp rho`` must lie inside it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import DegenerateExponent, SupportMismatch, SupportViolation, Unsupported, ZeroZ
from .matkit import as_matrix, graded_log_singular_values, psd_eigh
from .states import fidelity

LN2 = math.log(2.0)
SUPPORT_TOL = 1e-10
ALPHA1_WINDOW = 1e-6
Z0_WINDOW = 1e-8


@dataclass(frozen=True)
class DivergenceParams:
    """The pair (alpha, z); ``r`` records the slope when z = r (alpha - 1)."""

    alpha: float
    z: float
    r: float | None = None

    @classmethod
    def along_line(cls, alpha: float, r: float) -> "DivergenceParams":
        return cls(alpha, r * (alpha - 1), r)

    @property
    def p(self) -> float:
        return self.alpha / self.z

    @property
    def q(self) -> float:
        return (1 - self.alpha) / self.z

    @property
    def continuity_regime(self) -> bool:
        """False for alpha <= 0, where the divergence is discontinuous in rho."""
        return self.alpha > 0


def _compress(rho, sigma, with_basis: bool = False):
    """Express rho in the support eigenbasis of sigma.

    Returns ``(rho_s, lam)`` where ``lam`` are the positive eigenvalues of sigma,
    plus the isometry onto supp sigma when ``with_basis`` is set.
    """
    rho, sigma = as_matrix(rho), as_matrix(sigma)
    if rho.shape != sigma.shape:
        raise ValueError(f"shape mismatch {rho.shape} vs {sigma.shape}")
    lam, V, _ = psd_eigh(sigma)
    psd_eigh(rho)
    keep = lam > 0
    Vs = V[:, keep]
    off = rho - Vs @ (Vs.conj().T @ rho)
    scale = max(np.linalg.norm(rho, 2), 1e-300)
    if np.linalg.norm(off, 2) > SUPPORT_TOL * scale:
        raise SupportViolation("supp(rho) is not contained in supp(sigma)")
    rho_s = Vs.conj().T @ rho @ Vs
    rho_s = (rho_s + rho_s.conj().T) / 2
    return (rho_s, lam[keep], Vs) if with_basis else (rho_s, lam[keep])


def _rho_spectrum(rho_s):
    mu, U, _ = psd_eigh(rho_s)
    keep = mu > 0
    return mu[keep], U[:, keep]


def _log_product_functional(mu, U, lam, a: float, b: float, power: float) -> float:
    """log tr |rho^(a/2) sigma^(b/2)|^(2 power) with sigma = diag(lam), rho = U diag(mu) U*.

    The factor carrying the larger exponent is treated as a column grading so
    the result stays accurate when that exponent is huge.
    """
    if mu.size == 0:
        return -math.inf
    if abs(a) >= abs(b):
        Y = np.exp(b / 2 * np.log(lam))[:, None] * U
        log_d = a / 2 * np.log(mu)
    else:
        Y = np.exp(a / 2 * np.log(mu))[:, None] * U.conj().T
        log_d = b / 2 * np.log(lam)
    logsv = graded_log_singular_values(Y, log_d)
    if logsv.size == 0:
        return -math.inf
    return float(logsumexp(2 * power * logsv))


def log_trace_functional(rho, sigma, alpha: float, z: float) -> float:
    """Natural log of tr (sigma^((1-alpha)/2z) rho^(alpha/z) sigma^((1-alpha)/2z))^z.

    Negative z is evaluated at |z|.  The two agree whenever rho is invertible
    on supp sigma; for rank-deficient rho the pseudo-inverse powers at z < 0
    would break evenness in z, so evenness is taken as the definition.
    """
    if z == 0:
        raise ZeroZ("z = 0 has no direct formula; use the limit functions")
    z = abs(z)
    rho_s, lam = _compress(rho, sigma)
    mu, U = _rho_spectrum(rho_s)
    return _log_product_functional(mu, U, lam, alpha / z, (1 - alpha) / z, z)


def trace_functional(rho, sigma, alpha: float, z: float, form: int = 3) -> float:
    """f_{alpha,z}(rho || sigma).

    ``form=3`` (default) evaluates the sigma-sandwiched operator through the
    graded singular value routine.  Forms 1 and 2 are straightforward
    eigenvalue evaluations of rho^a sigma^b and rho^(a/2) sigma^b rho^(a/2);
    they are only reliable for moderate exponents and exist for cross-checks.
    """
    if form == 3:
        return math.exp(log_trace_functional(rho, sigma, alpha, z))
    if z == 0:
        raise ZeroZ("z = 0 has no direct formula; use the limit functions")
    z = abs(z)
    rho_s, lam = _compress(rho, sigma)
    mu, U = _rho_spectrum(rho_s)
    a, b = alpha / z, (1 - alpha) / z
    sig_b = np.diag(lam ** b)
    if form == 1:
        P = (U * mu ** a) @ U.conj().T @ sig_b
        ev = np.linalg.eigvals(P).real
    elif form == 2:
        half = (U * mu ** (a / 2)) @ U.conj().T
        ev = np.linalg.eigvalsh(half @ sig_b @ half)
    else:
        raise ValueError("form must be 1, 2 or 3")
    if ev.size == 0:
        return 0.0
    ev = ev[ev > 1e-13 * max(np.max(np.abs(ev)), 1e-300)]
    return float(np.sum(ev ** z))


def f_pq(A, K, p: float, q: float) -> float:
    """tr (A^p K A^q K*)^(1/(p+q)) for PSD A, powers taken on supp A."""
    if p + q == 0:
        raise DegenerateExponent("p + q must be nonzero")
    A, K = as_matrix(A), as_matrix(K)
    mu, U, _ = psd_eigh(A)
    keep = mu > 0
    mu, U = mu[keep], U[:, keep]
    if mu.size == 0:
        return 0.0
    Kp = U.conj().T @ K @ U
    logmu = np.log(mu)
    if abs(p) >= abs(q):
        Y = np.exp(q / 2 * logmu)[:, None] * Kp.conj().T
        log_d = p / 2 * logmu
    else:
        Y = np.exp(p / 2 * logmu)[:, None] * Kp
        log_d = q / 2 * logmu
    logsv = graded_log_singular_values(Y, log_d)
    if logsv.size == 0:
        return 0.0
    return math.exp(float(logsumexp(2 / (p + q) * logsv)))


def _trace(rho) -> float:
    return float(np.trace(as_matrix(rho)).real)


def d_alpha_z(rho, sigma, alpha: float, z: float | None = None, *, r: float | None = None) -> float:
    """D_{alpha,z}(rho || sigma) = log2(f_{alpha,z} / tr rho) / (alpha - 1).

    Pass either ``z`` or the slope ``r`` (then z = r (alpha - 1)).  Near
    alpha = 1 the call is routed to a closed-form limit: the alpha -> 1 limit
    along z = r (alpha - 1) when ``r`` is given or z is ~0, and the relative
    entropy otherwise (the alpha -> 1 limit at fixed nonzero z).
    """
    if z is None:
        if r is None:
            raise ValueError("give z or r")
        z = r * (alpha - 1)
    if abs(alpha - 1) < ALPHA1_WINDOW:
        if r is not None or abs(z) < Z0_WINDOW:
            from .limits import limit_alpha1

            if r is None:
                raise Unsupported("alpha -> 1 with z -> 0 needs the slope r")
            side = None if alpha == 1 else (1 if alpha > 1 else -1)
            return limit_alpha1(rho, sigma, r, side=side)
        return relative_entropy(rho, sigma)
    if abs(z) < Z0_WINDOW:
        raise Unsupported("the z -> 0 limit at fixed alpha != 1 is not implemented")
    logf = log_trace_functional(rho, sigma, alpha, z)
    return (logf - math.log(_trace(rho))) / ((alpha - 1) * LN2)


def relative_entropy(rho, sigma) -> float:
    """tr rho log rho - tr rho log sigma, in bits."""
    rho_s, lam = _compress(rho, sigma)
    mu, _ = _rho_spectrum(rho_s)
    first = float(np.sum(mu * np.log(mu)))
    second = float(np.real(np.sum(np.diagonal(rho_s) * np.log(lam))))
    return (first - second) / LN2


def d_min(rho, sigma) -> float:
    """-2 log2 F(rho, sigma)."""
    F = fidelity(rho, sigma)
    return math.inf if F == 0 else -2 * math.log2(F)


def d_max(rho, sigma) -> float:
    """log2 of the largest eigenvalue of sigma^-1/2 rho sigma^-1/2 on supp sigma."""
    rho_s, lam = _compress(rho, sigma)
    s = lam ** -0.5
    M = s[:, None] * rho_s * s[None, :]
    top = float(np.linalg.eigvalsh((M + M.conj().T) / 2)[-1])
    return math.log2(top) if top > 0 else -math.inf


def alpha_rre(rho, sigma, alpha: float) -> float:
    return d_alpha_z(rho, sigma, alpha, 1.0)


def qrd(rho, sigma, alpha: float) -> float:
    """Sandwiched quantum Renyi divergence, z = alpha."""
    if alpha == 1:
        return relative_entropy(rho, sigma)
    return d_alpha_z(rho, sigma, alpha, alpha)


def reverse_qrd(rho, sigma, alpha: float) -> float:
    """Reverse-sandwiched divergence, z = 1 - alpha (alpha = 1 gives the r = -1 limit)."""
    if abs(alpha - 1) < ALPHA1_WINDOW:
        return d_alpha_z(rho, sigma, alpha, r=-1.0)
    return d_alpha_z(rho, sigma, alpha, 1 - alpha)


def d_z_infinity(rho, sigma, alpha: float) -> float:
    """log2 tr exp(alpha log rho + (1 - alpha) log sigma) / (alpha - 1).

    Requires supp rho = supp sigma and works on that common support.  At
    alpha = 1 this is the relative entropy.
    """
    rho_s, lam = _compress(rho, sigma)
    mu, U, _ = psd_eigh(rho_s)
    if np.any(mu <= 0):
        raise SupportMismatch("supp(rho) must equal supp(sigma)")
    if abs(alpha - 1) < ALPHA1_WINDOW:
        return relative_entropy(rho, sigma)
    H = alpha * (U * np.log(mu)) @ U.conj().T + (1 - alpha) * np.diag(np.log(lam))
    ev = np.linalg.eigvalsh((H + H.conj().T) / 2)
    return (float(logsumexp(ev)) - math.log(_trace(rho))) / ((alpha - 1) * LN2)


def classical_renyi(p, q, alpha: float) -> float:
    """(1/(alpha-1)) log2 sum p^alpha q^(1-alpha), over the support of p."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    on = p > 0
    if np.any(q[on] <= 0):
        raise SupportViolation("supp(p) is not contained in supp(q)")
    pp, qq = p[on], q[on]
    if alpha == 1:
        return float(np.sum(pp * np.log2(pp / qq)) / np.sum(pp))
    total = float(logsumexp(alpha * np.log(pp) + (1 - alpha) * np.log(qq)))
    return (total - math.log(np.sum(pp))) / ((alpha - 1) * LN2)

"""Randomized verification suites.

Each suite draws its cases from child streams ``(seed, trial)`` and reduces
the per-trial outcomes in trial order, so results are identical for any
number of worker processes.  A suite returns a :class:`SuiteResult`; suites
probing open conjectures set ``asserted=False`` and only report.
"""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import partial
from typing import Callable, Sequence

import numpy as np

from .channels import default_jobs
from .divergence import (d_alpha_z, f_pq, qrd, reverse_qrd, trace_functional)
from .errors import DegenerateTopEigenvalue, InvalidSegmentSum
from .matkit import as_matrix, direct_sum, hermitian_part, spectral_decompose, tensor_product
from .states import (RandomSpec, derive_seed, ginibre, random_density, random_positive,
                     random_unitary, stream)


@dataclass
class SuiteResult:
    suite_name: str
    cases_run: int
    failures: list = field(default_factory=list)
    tolerance: float = 0.0
    asserted: bool = True
    warnings: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.failures

    @property
    def ok(self) -> bool:
        """True unless an asserted suite has failures."""
        return self.passed or not self.asserted

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, default=float)

    def summary_line(self) -> str:
        status = "PASS" if self.passed else ("FAIL" if self.asserted else "REPORT")
        return f"{status:6s} {self.suite_name:32s} cases={self.cases_run:<6d} failures={len(self.failures)}"


def digest(*arrays) -> str:
    h = hashlib.sha256()
    for a in arrays:
        h.update(np.ascontiguousarray(np.asarray(a, dtype=complex)).tobytes())
    return h.hexdigest()[:16]


def _run(trial: Callable, trials: int, seed: int, jobs: int | None) -> list:
    seeds = [derive_seed(seed, t) for t in range(trials)]
    jobs = default_jobs() if jobs is None else max(1, int(jobs))
    if jobs == 1 or trials < 2 * jobs:
        return [trial(s) for s in seeds]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(trial, seeds, chunksize=max(1, trials // (4 * jobs))))


def _collect(outcomes) -> list:
    fails = []
    for case, out in enumerate(outcomes):
        for f in out:
            fails.append({"case": case, **f})
    return fails


# ---------------------------------------------------------------- f_pq suites

def pq_region(p: float, q: float, tol: float = 1e-12) -> str:
    """Known status of f_pq(.; K) on positive matrices.

    Returns "concave-proven", "convex-proven", "convex-conjectured" or "none".
    The status is symmetric in (p, q) since f_pq(A; K) = f_qp(A; K*).
    """
    if 0 < p <= 1 + tol and 0 < q <= 1 + tol:
        return "concave-proven"
    for a, b in ((p, q), (q, p)):
        if -1 - tol <= a < 0 and 1 - tol <= b <= 2 + tol:
            if abs(a + b - 1) <= tol or abs(b - 1) <= tol:
                return "convex-proven"
            return "convex-conjectured"
    return "none"


def _midpoint_gap(p, q, A1, A2, K, lam=0.5) -> tuple[float, float]:
    """f(lam A1 + (1-lam) A2) - [lam f(A1) + (1-lam) f(A2)] and the scale used."""
    fm = f_pq(lam * A1 + (1 - lam) * A2, K, p, q)
    avg = lam * f_pq(A1, K, p, q) + (1 - lam) * f_pq(A2, K, p, q)
    return fm - avg, max(1.0, abs(avg))


def _pq_trial(child, p, q, dim, tol, sign, random_weight):
    rng = stream(child)
    A1 = random_positive(dim, rng)
    A2 = random_positive(dim, rng)
    K = ginibre(dim, dim, rng)
    lam = float(rng.uniform(0.05, 0.95)) if random_weight else 0.5
    gap, scale = _midpoint_gap(p, q, A1, A2, K, lam)
    # sign=+1 tests concavity (gap >= 0), sign=-1 convexity (gap <= 0)
    if sign * gap < -tol * scale:
        return [{"seed": child, "digest": digest(A1, A2, K), "magnitude": float(abs(gap)), "weight": lam}]
    return []


def concavity_suite(p: float, q: float, dim: int = 3, trials: int = 200, seed: int = 0,
                    tol: float = 1e-9, random_weight: bool = False, jobs: int | None = None) -> SuiteResult:
    """Midpoint concavity of A -> f_pq(A; K) on random positive A1, A2 and random K."""
    out = _run(partial(_pq_trial, p=p, q=q, dim=dim, tol=tol, sign=1, random_weight=random_weight),
               trials, seed, jobs)
    region = pq_region(p, q)
    res = SuiteResult(f"concavity(p={p:g},q={q:g})", trials, _collect(out), tol,
                      asserted=region == "concave-proven", extra={"region": region})
    if region != "concave-proven":
        res.warnings.append("(p, q) outside the proven concavity square; reported only")
    return res


def convexity_conjecture_suite(p: float, q: float, dim: int = 3, trials: int = 200, seed: int = 0,
                               tol: float = 1e-9, random_weight: bool = False,
                               jobs: int | None = None) -> SuiteResult:
    """Midpoint convexity of A -> f_pq(A; K).

    Asserted only on the proven lines inside the conjectured cells; anywhere
    else failures are potential counterexamples and are reported with the
    seed needed to reproduce them.
    """
    out = _run(partial(_pq_trial, p=p, q=q, dim=dim, tol=tol, sign=-1, random_weight=random_weight),
               trials, seed, jobs)
    region = pq_region(p, q)
    res = SuiteResult(f"convexity(p={p:g},q={q:g})", trials, _collect(out), tol,
                      asserted=region == "convex-proven", extra={"region": region})
    if not region.startswith("convex"):
        res.warnings.append("(p, q) is not in a conjectured convexity cell")
    return res


# ------------------------------------------------------- approximation lemma

def approximation_constant(A, B, alpha: float, gap_tol: float = 1e-9) -> dict:
    """The constant c in

        lambda_1((A^b B A^b)^(1-alpha)) = mu_1^alpha B11^(1-alpha) (1 + c (mu_2/mu_1)^(2b))^(1-alpha),

    b = alpha / (2 (1 - alpha)), together with its admissible upper end
    lambda_1(B) / B11.

    c is obtained from the secular equation of the top eigenvalue written in
    the eigenbasis of A, with every power of mu_k/mu_2 scaled out, so it is
    accurate even when (mu_2/mu_1)^(2b) underflows.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    dec = spectral_decompose(A, tol_herm=1e-8)
    mu, V = dec.eigenvalues, dec.eigenvectors
    if len(mu) < 2 or mu[0] - mu[1] <= gap_tol * mu[0]:
        raise DegenerateTopEigenvalue("mu_1 - mu_2 is below the gap threshold")
    if mu[-1] < -1e-12 * mu[0]:
        raise ValueError("A must be positive semidefinite")
    mu = np.clip(mu, 0, None)
    if mu[1] == 0:
        mu = mu.copy()
        mu[1:] = np.where(mu[1:] > 0, mu[1:], 1e-300)
    Bp = V.conj().T @ as_matrix(B) @ V
    Bp = (Bp + Bp.conj().T) / 2
    beta = alpha / (2 * (1 - alpha))
    b11 = float(Bp[0, 0].real)
    with np.errstate(divide="ignore"):
        lr = np.log(mu[1:]) - math.log(mu[1])
    t = np.exp(beta * lr)                     # (mu_k / mu_2)^beta, k >= 2
    t2 = math.exp(beta * (math.log(mu[1]) - math.log(mu[0]))) if mu[1] > 0 else 0.0
    w = t * Bp[1:, 0]
    C = (t2 * t)[:, None] * Bp[1:, 1:] * (t2 * t)[None, :]
    # top eigenvalue of the scaled matrix diag(1, t2 t) B diag(1, t2 t)
    Dg = np.concatenate([[1.0], t2 * t])
    N = Dg[:, None] * Bp * Dg[None, :]
    lam1 = float(np.linalg.eigvalsh((N + N.conj().T) / 2)[-1])
    x = t2 * t2
    if x > 1e-3:
        # no cancellation worth avoiding, and lam1 may belong to the lower block
        c = (lam1 / b11 - 1) / x
    else:
        # secular equation lam1 = b11 + x w* (lam1 - C)^-1 w; lam1 sits far above Sp C here
        M = lam1 * np.eye(len(w)) - C
        c = float(np.real(np.vdot(w, np.linalg.solve(M, w)))) / b11
    kappa = float(np.linalg.eigvalsh(Bp)[-1]) / b11
    rel = math.expm1((1 - alpha) * math.log1p(c * x))
    return {"c": c, "upper": kappa, "x": x, "relative_error": rel, "b11": b11,
            "lambda1_scaled": lam1}


def _approx_trial(child, dims, alphas, tol):
    rng = stream(child)
    dim = dims[int(rng.integers(len(dims)))]
    while True:
        mu = np.sort(rng.exponential(size=dim))[::-1]
        if mu[0] - mu[1] > 1e-6 * mu[0]:
            break
    U = random_unitary(dim, rng)
    A = (U * mu) @ U.conj().T
    B = random_positive(dim, rng)
    fails, stats = [], []
    for a in alphas:
        r = approximation_constant(A, B, a)
        stats.append((r["c"], r["c"] / r["upper"], r["relative_error"]))
        lo_bad = r["c"] < -tol
        hi_bad = r["c"] > r["upper"] + tol * max(1.0, r["upper"])
        if lo_bad or hi_bad:
            fails.append({"seed": child, "digest": digest(A, B), "alpha": a,
                          "magnitude": float(-r["c"] if lo_bad else r["c"] - r["upper"])})
    return fails, stats


def approximation_lemma_suite(dim: int | Sequence[int] = (2, 3, 4, 5), trials: int = 1000, seed: int = 0,
                              alpha_list: Sequence[float] = (0.5, 0.9, 0.99), tol: float = 1e-9,
                              jobs: int | None = None) -> SuiteResult:
    """Checks 0 <= c <= lambda_1(B)/B11 on random (A, B)."""
    dims = (int(dim),) if np.isscalar(dim) else tuple(int(d) for d in dim)
    out = _run(partial(_approx_trial, dims=dims, alphas=tuple(alpha_list), tol=tol), trials, seed, jobs)
    fails = _collect([o[0] for o in out])
    stats = np.array([s for o in out for s in o[1]])
    extra = {"max_c": float(stats[:, 0].max()), "min_c": float(stats[:, 0].min()),
             "max_c_over_upper": float(stats[:, 1].max()),
             "max_relative_error": float(stats[:, 2].max()), "alphas": list(alpha_list)}
    return SuiteResult("approximation-lemma", trials, fails, tol, extra=extra)


# ---------------------------------------------------------- complex segments

def imag_part(C) -> np.ndarray:
    C = as_matrix(C)
    return (C - C.conj().T) / 2j


@dataclass(frozen=True)
class ComplexSegment:
    """Open sector of nonzero complex numbers with argument in (alpha_angle, beta_angle)."""

    alpha_angle: float
    beta_angle: float

    def __post_init__(self):
        a, b = self.alpha_angle, self.beta_angle
        if not -math.pi <= a < b <= math.pi:
            raise ValueError("need -pi <= alpha_angle < beta_angle <= pi")
        if b - a > math.pi:
            raise ValueError("only convex segments (width <= pi) are supported")

    @property
    def width(self) -> float:
        return self.beta_angle - self.alpha_angle

    def __add__(self, other: "ComplexSegment") -> tuple[float, float]:
        return self.alpha_angle + other.alpha_angle, self.beta_angle + other.beta_angle

    def margin(self, C) -> float:
        """Smallest eigenvalue among Im(e^{-i a} C) and -Im(e^{-i b} C); positive iff C is inside."""
        lo = np.linalg.eigvalsh(imag_part(np.exp(-1j * self.alpha_angle) * as_matrix(C)))[0]
        hi = np.linalg.eigvalsh(-imag_part(np.exp(-1j * self.beta_angle) * as_matrix(C)))[0]
        return float(min(lo, hi))

    def contains(self, C) -> bool:
        return self.margin(C) > 0

    def sample(self, dim: int, rng) -> np.ndarray:
        """e^{i theta} (P + i H) with P > 0 and -tan(w/2) P < H < tan(w/2) P, verified before return."""
        theta, h = (self.alpha_angle + self.beta_angle) / 2, self.width / 2
        for _ in range(100):
            P = random_positive(dim, rng, shift=0.05)
            G = ginibre(dim, dim, rng)
            G = (G + G.conj().T) / 2
            if h >= math.pi / 2 - 1e-12:
                H = G
            else:
                u = float(rng.uniform(0.1, 0.95))
                G = u * G / np.linalg.norm(G, 2)
                R = np.linalg.cholesky(P)
                H = math.tan(h) * (R @ G @ R.conj().T)
            C = np.exp(1j * theta) * (P + 1j * H)
            if self.contains(C):
                return C
        raise RuntimeError("could not sample inside the segment")


def _arg_margin(ev, lo, hi) -> float:
    ang = np.angle(ev)
    return float(np.min(np.minimum(ang - lo, hi - ang)))


def _segment_trial(child, seg1, seg2, dim, tol):
    rng = stream(child)
    A1 = seg1.sample(dim, rng)
    A2 = seg2.sample(dim, rng)
    lo, hi = seg1 + seg2
    m = _arg_margin(np.linalg.eigvals(A1 @ A2), lo, hi)
    if m < -tol:
        return [{"seed": child, "digest": digest(A1, A2), "magnitude": -m}]
    return []


def segment_spectrum_suite(seg1: ComplexSegment, seg2: ComplexSegment, dim: int = 3, trials: int = 1000,
                           seed: int = 0, tol: float = 1e-9, jobs: int | None = None) -> SuiteResult:
    """Spectrum of A1 A2 lies in the summed segment for A_i drawn inside seg_i."""
    lo, hi = seg1 + seg2
    if lo < -math.pi or hi > math.pi:
        raise InvalidSegmentSum(f"summed angles ({lo:.4g}, {hi:.4g}) leave [-pi, pi]")
    out = _run(partial(_segment_trial, seg1=seg1, seg2=seg2, dim=dim, tol=tol), trials, seed, jobs)
    return SuiteResult(f"segment-spectrum({seg1.alpha_angle:.3g},{seg1.beta_angle:.3g})"
                       f"+({seg2.alpha_angle:.3g},{seg2.beta_angle:.3g})",
                       trials, _collect(out), tol)


# ------------------------------------------------------------ resolvent bounds

def resolvent_quantities(C) -> dict:
    """eta, eps and gamma for C.

    eta = max(|a|, |b|) with a <= Im C <= b; eps = distance of the spectrum
    to the closed negative axis; gamma = min real part of the spectrum.
    """
    C = as_matrix(C)
    w = np.linalg.eigvalsh(imag_part(C))
    ev = np.linalg.eigvals(C)
    dist = np.where(ev.real >= 0, np.abs(ev), np.abs(ev.imag))
    return {"eta": float(max(abs(w[0]), abs(w[-1]))), "eps": float(dist.min()),
            "gamma": float(ev.real.min())}


def resolvent_imag_norm(C, t: float) -> float:
    C = as_matrix(C)
    R = np.linalg.inv(t * np.eye(len(C)) + C)
    return float(np.linalg.norm(imag_part(-R), 2))


def _resolvent_trial(child, dim, t_grid, tol, normal):
    rng = stream(child)
    ang = rng.uniform(-0.95 * math.pi, 0.95 * math.pi, dim)
    ev = np.exp(rng.normal(size=dim)) * np.exp(1j * ang)
    V = random_unitary(dim, rng) if normal else ginibre(dim, dim, rng) + 2 * np.eye(dim)
    C = V @ np.diag(ev) @ np.linalg.inv(V)
    qq = resolvent_quantities(C)
    eta, eps, g = qq["eta"], qq["eps"], abs(qq["gamma"])
    fails = []
    for t in t_grid:
        lhs = resolvent_imag_norm(C, t)
        b1 = eta / eps**2
        if lhs > b1 + tol * max(1.0, b1):
            fails.append({"seed": child, "digest": digest(C), "t": t, "bound": "eta/eps^2",
                          "magnitude": lhs - b1})
        if t > g:
            b2 = eta / (t - g) ** 2
            if lhs > b2 + tol * max(1.0, b2):
                fails.append({"seed": child, "digest": digest(C), "t": t, "bound": "eta/(t-|gamma|)^2",
                              "magnitude": lhs - b2})
    return fails


def resolvent_bound_suite(dim: int = 3, trials: int = 200, seed: int = 0,
                          t_grid: Sequence[float] = (0.0, 0.1, 1.0, 10.0, 100.0, 1000.0),
                          tol: float = 1e-10, normal: bool = False, jobs: int | None = None) -> SuiteResult:
    """Bounds on ||Im(-(t + C)^-1)|| used to justify the fractional-power integral.

    The tail bound is checked with |gamma|: for gamma < 0 the spectrum of
    t + C comes within t - |gamma| of the origin.  By default C is a random
    non-normal matrix (eigenvalues off the cut, random similarity); pass
    ``normal=True`` for unitary similarities.
    """
    out = _run(partial(_resolvent_trial, dim=dim, t_grid=tuple(t_grid), tol=tol, normal=normal),
               trials, seed, jobs)
    return SuiteResult("resolvent-bounds" + ("(normal)" if normal else ""), trials,
                       _collect(out), tol)


# -------------------------------------------------------------------- axioms

def normalization_grid(n: int = 5, lo: float = 0.25, hi: float = 3.0) -> list[tuple[float, float, float]]:
    """D_{alpha,z}(I || I/2) on an n x n grid; returns (alpha, z, value) triples."""
    I = np.eye(2)
    return [(a, z, d_alpha_z(I, I / 2, a, z)) for a in np.linspace(lo, hi, n) for z in np.linspace(lo, hi, n)]


_AXIOM_POINTS = ((0.25, 0.8), (0.5, 0.5), (0.75, 1.0), (1.5, 1.5), (2.0, 1.0), (3.0, 2.5), (0.6, -1.3))


def _order_pair(rng, dim):
    base = random_density(RandomSpec(dim), rng)
    W = ginibre(dim, int(rng.integers(1, dim + 1)), rng)
    bump = W @ W.conj().T
    bump *= float(rng.uniform(0.05, 1.0)) / np.trace(bump).real
    return base, hermitian_part(base + bump)


def _axiom_trial(child, dims, tol):
    rng = stream(child)
    dim = dims[int(rng.integers(len(dims)))]
    alpha, z = _AXIOM_POINTS[int(rng.integers(len(_AXIOM_POINTS)))]
    rho, sigma = random_density(dim, rng), random_density(dim, rng)
    tau, omega = random_density(dim, rng), random_density(dim, rng)
    fails = []

    def check(name, err, bound=tol):
        if not err <= bound:
            fails.append({"seed": child, "digest": digest(rho, sigma, tau, omega), "check": name,
                          "alpha": alpha, "z": z, "magnitude": float(err)})

    D = d_alpha_z(rho, sigma, alpha, z)
    check("evenness", abs(D - d_alpha_z(rho, sigma, alpha, -z)))
    U = random_unitary(dim, rng)
    check("unitary", abs(D - d_alpha_z(U @ rho @ U.conj().T, U @ sigma @ U.conj().T, alpha, z)))
    for a in (0.25, 0.75, 1.5):
        lhs = (a - 1) * d_alpha_z(rho, sigma, a, z)
        check("skew-symmetry", abs(lhs + a * d_alpha_z(sigma, rho, 1 - a, z)))
    check("hat-symmetry", abs(-0.7 * reverse_qrd(rho, sigma, 0.3) + 0.3 * qrd(sigma, rho, 0.7)))
    add = d_alpha_z(tensor_product(rho, tau), tensor_product(sigma, omega), alpha, z)
    check("additivity", abs(add - D - d_alpha_z(tau, omega, alpha, z)))
    u = float(rng.uniform(0.1, 0.9))
    r1, r2 = u * rho, (1 - u) * tau
    fs = trace_functional(direct_sum(r1, r2), direct_sum(sigma, omega), alpha, z)
    f1, f2 = trace_functional(r1, sigma, alpha, z), trace_functional(r2, omega, alpha, z)
    check("direct-sum", abs(fs - f1 - f2))
    g = lambda x: 2 ** ((alpha - 1) * x)
    lhs = g(d_alpha_z(direct_sum(r1, r2), direct_sum(sigma, omega), alpha, z))
    rhs = (u * g(d_alpha_z(r1, sigma, alpha, z)) + (1 - u) * g(d_alpha_z(r2, omega, alpha, z)))
    check("mean-value", abs(lhs - rhs))
    forms = [trace_functional(rho, sigma, alpha, z, k) for k in (1, 2, 3)]
    check("three-forms", (max(forms) - min(forms)) / max(1.0, abs(forms[2])), 1e-10)

    # order axiom on the closed region z >= |alpha - 1|
    small, big = _order_pair(rng, dim)
    oa = float(rng.choice([0.3, 0.6, 1.4, 2.0, 2.7]))
    oz = abs(oa - 1) if rng.random() < 0.25 else abs(oa - 1) + float(rng.uniform(0, 2))
    check("order(rho>=sigma)", -d_alpha_z(big, small, oa, oz))
    check("order(rho<=sigma)", d_alpha_z(small, big, oa, oz))

    # continuity: finite differences scale linearly in the step
    if alpha > 0:
        Dl = ginibre(dim, dim, rng)
        Dl = (Dl + Dl.conj().T) / 2
        Dl -= np.trace(Dl).real / dim * np.eye(dim)
        Dl /= np.linalg.norm(Dl, 2) / np.linalg.eigvalsh(rho)[0]
        d3 = abs(d_alpha_z(rho + 1e-3 * Dl, sigma, alpha, z) - D)
        d6 = abs(d_alpha_z(rho + 1e-6 * Dl, sigma, alpha, z) - D)
        check("continuity", d6 - 2e-3 * d3, 1e-9)
    return fails


def axiom_suite(dims: int | Sequence[int] = (2, 3, 4), trials: int = 200, seed: int = 0,
                tol: float = 1e-9, jobs: int | None = None) -> SuiteResult:
    """Identities and axioms of the divergence on random instances.

    Per trial: evenness in z, unitary invariance, skew symmetry, the
    reverse-sandwiched symmetry, additivity under tensor products, the
    direct-sum identity for the functional, the mean-value identity with
    g(x) = 2^((alpha-1) x), agreement of the three functional forms, the
    order axiom in both directions, and a continuity probe.  The
    normalization grid runs once.
    """
    dims = (int(dims),) if np.isscalar(dims) else tuple(int(d) for d in dims)
    grid = normalization_grid()
    fails = [{"case": -1, "check": "normalization", "alpha": a, "z": z, "magnitude": abs(v - 1)}
             for a, z, v in grid if abs(v - 1) > 1e-10]
    out = _run(partial(_axiom_trial, dims=dims, tol=tol), trials, seed, jobs)
    fails += _collect(out)
    return SuiteResult("axioms", trials, fails, tol, extra={"normalization_points": len(grid)})


SUITES = {
    "axioms": axiom_suite,
    "approximation-lemma": approximation_lemma_suite,
    "resolvent-bounds": resolvent_bound_suite,
}

"""CPTP maps in Kraus form and a randomized data-processing check.

A scan draws the same sequence of (rho, sigma, channel) triples for every
(alpha, z) point (common random numbers): trial ``t`` uses the child stream
``(seed, t)``.  This keeps points comparable, makes the report for (alpha, z)
and (alpha, -z) identical, and lets any worst case be replayed from the single
integer stored in ``worst_seed``.
"""

from __future__ import annotations

import csv
import io
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .divergence import DivergenceParams, d_alpha_z
from .errors import DimensionMismatch
from .matkit import as_matrix
from .states import RandomSpec, derive_seed, random_density, random_isometry, stream

TP_TOL = 1e-10
DPI_TOL = 1e-8
JOBS_ENV = "AZRENYI_JOBS"

PROVEN = "proven"
CONJECTURED = "conjectured"
KNOWN_FALSE = "known-false"


@dataclass(frozen=True)
class KrausChannel:
    kraus_ops: tuple

    def __post_init__(self):
        ops = tuple(np.asarray(K, dtype=complex) for K in self.kraus_ops)
        if not ops:
            raise ValueError("a channel needs at least one Kraus operator")
        shape = ops[0].shape
        if len(shape) != 2 or any(K.shape != shape for K in ops):
            raise DimensionMismatch("Kraus operators must share one d_out x d_in shape")
        gram = sum(K.conj().T @ K for K in ops)
        err = float(np.max(np.abs(gram - np.eye(shape[1]))))
        if err > TP_TOL:
            raise ValueError(f"not trace preserving: |sum K*K - I| = {err:.3g}")
        object.__setattr__(self, "kraus_ops", ops)

    @property
    def d_in(self) -> int:
        return self.kraus_ops[0].shape[1]

    @property
    def d_out(self) -> int:
        return self.kraus_ops[0].shape[0]

    def __call__(self, X) -> np.ndarray:
        return apply(self, X)


def apply(channel: KrausChannel, X) -> np.ndarray:
    X = as_matrix(X)
    if X.shape != (channel.d_in, channel.d_in):
        raise DimensionMismatch(f"channel expects {channel.d_in}x{channel.d_in}, got {X.shape}")
    out = sum(K @ X @ K.conj().T for K in channel.kraus_ops)
    return (out + out.conj().T) / 2


def identity_channel(dim: int) -> KrausChannel:
    return KrausChannel((np.eye(dim),))


def weyl_operators(dim: int) -> list[np.ndarray]:
    """The dim**2 clock-and-shift unitaries X^a Z^b."""
    shift = np.roll(np.eye(dim), 1, axis=0)
    clock = np.diag(np.exp(2j * np.pi * np.arange(dim) / dim))
    return [np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b)
            for a in range(dim) for b in range(dim)]


def depolarizing_channel(dim: int, p: float = 1.0) -> KrausChannel:
    """X -> (1 - p) X + p tr(X) I/dim; p = 1 is the fully depolarizing map."""
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    W = weyl_operators(dim)
    ops = [np.sqrt(p) * U / dim for U in W[1:]]
    ops.insert(0, np.sqrt(1 - p + p / dim**2) * W[0])
    return KrausChannel(tuple(ops))


def partial_trace_channel(d_a: int, d_b: int, keep: str = "a") -> KrausChannel:
    """Trace out one factor of C^d_a (x) C^d_b."""
    if keep == "a":
        ops = [np.kron(np.eye(d_a), np.eye(d_b)[j][None, :]) for j in range(d_b)]
    elif keep == "b":
        ops = [np.kron(np.eye(d_a)[j][None, :], np.eye(d_b)) for j in range(d_a)]
    else:
        raise ValueError("keep must be 'a' or 'b'")
    return KrausChannel(tuple(ops))


def random_channel(d_in: int, d_out: int, kraus_count: int, seed=0) -> KrausChannel:
    """Kraus operators cut from a Haar isometry C^d_in -> C^(d_out * kraus_count)."""
    if kraus_count < 1:
        raise ValueError("kraus_count must be at least 1")
    if d_out * kraus_count < d_in:
        raise ValueError("need d_out * kraus_count >= d_in")
    V = random_isometry(d_in, d_out * kraus_count, seed)
    return KrausChannel(tuple(V[k * d_out:(k + 1) * d_out] for k in range(kraus_count)))


def _params(params) -> DivergenceParams:
    if isinstance(params, DivergenceParams):
        return params
    alpha, z = params
    return DivergenceParams(float(alpha), float(z))


def dpi_check(rho, sigma, channel: KrausChannel, params) -> float:
    """D(channel(rho) || channel(sigma)) - D(rho || sigma); positive means a violation."""
    pr = _params(params)
    before = d_alpha_z(rho, sigma, pr.alpha, pr.z)
    after = d_alpha_z(apply(channel, rho), apply(channel, sigma), pr.alpha, pr.z)
    return after - before


def classify_region(alpha: float, z: float, tol: float = 1e-12) -> str:
    """Where (alpha, z) sits with respect to the data-processing inequality.

    Only |z| matters since the divergence is even in z.  The reverse
    sandwiched line z = 1 - alpha for alpha <= 1/2 lies inside the first
    proven clause.
    """
    z = abs(z)
    if 0 < alpha <= 1 + tol and z >= max(alpha, 1 - alpha) - tol:
        return PROVEN
    if 1 - tol <= alpha <= 2 + tol and abs(z - 1) <= tol:
        return PROVEN
    if alpha >= 1 - tol and abs(z - alpha) <= tol:
        return PROVEN
    if alpha > 1 and max(alpha - 1, alpha / 2) - tol <= z <= alpha + tol:
        return CONJECTURED
    return KNOWN_FALSE


def sample_triple(trial_seed: int, dim: int):
    """(rho, sigma, channel) for one trial.

    rho has a random rank in [1, dim] (low-rank inputs expose violations much
    faster), sigma is full rank, and the channel has 1..dim**2 Kraus operators.
    """
    rng = stream(trial_seed)
    rank = int(rng.integers(1, dim + 1))
    rho = random_density(RandomSpec(dim, rank), rng)
    sigma = random_density(RandomSpec(dim), rng)
    kc = int(rng.integers(1, dim * dim + 1))
    return rho, sigma, random_channel(dim, dim, kc, rng)


@dataclass
class DpiPoint:
    alpha: float
    z: float
    region_class: str
    trials: int
    max_violation: float
    worst_seed: int


@dataclass
class DpiReport:
    points: list[DpiPoint] = field(default_factory=list)
    seed: int = 0
    dims: tuple = ()
    tolerance: float = DPI_TOL

    COLUMNS = ("alpha", "z", "region_class", "trials", "max_violation", "worst_seed")

    @property
    def grid(self) -> list[tuple[float, float]]:
        return [(p.alpha, p.z) for p in self.points]

    def proven_failures(self) -> list[DpiPoint]:
        return [p for p in self.points if p.region_class == PROVEN and p.max_violation > self.tolerance]

    def summary(self) -> dict:
        counts: dict = {}
        for p in self.points:
            counts[p.region_class] = counts.get(p.region_class, 0) + 1
        return {"points": len(self.points), "per_class": counts,
                "proven_failures": len(self.proven_failures())}

    def to_csv(self, fh=None) -> str:
        buf = io.StringIO() if fh is None else fh
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.COLUMNS)
        for p in self.points:
            w.writerow([repr(p.alpha), repr(p.z), p.region_class, p.trials,
                        repr(p.max_violation), p.worst_seed])
        return buf.getvalue() if fh is None else ""

    def to_json(self) -> str:
        return json.dumps({"seed": self.seed, "dims": list(self.dims), "tolerance": self.tolerance,
                           "points": [asdict(p) for p in self.points]}, indent=2)


def default_jobs() -> int:
    try:
        return max(1, int(os.environ.get(JOBS_ENV, "1")))
    except ValueError:
        return 1


def _scan_point(args) -> DpiPoint:
    alpha, z, dims, trials, seed = args
    worst, worst_seed = -np.inf, -1
    for t in range(trials):
        ts = derive_seed(seed, t)
        rho, sigma, ch = sample_triple(ts, dims[t % len(dims)])
        v = dpi_check(rho, sigma, ch, (alpha, z))
        if v > worst:
            worst, worst_seed = v, ts
    return DpiPoint(float(alpha), float(z), classify_region(alpha, z), trials, float(worst), worst_seed)


def dpi_scan(alpha_grid: Iterable[float], z_grid: Iterable[float] | None = None,
             dims: int | Sequence[int] = 3, trials: int = 100, seed: int = 0,
             jobs: int | None = None, points: Sequence[tuple[float, float]] | None = None) -> DpiReport:
    """Randomized DPI search on a grid.

    The grid is the Cartesian product ``alpha_grid x z_grid``, or the explicit
    list ``points`` of (alpha, z) pairs when given (then ``alpha_grid`` is
    ignored).  Rows come back in grid order whatever ``jobs`` is.
    """
    if points is None:
        if z_grid is None:
            raise ValueError("give z_grid or points")
        points = [(a, z) for a in alpha_grid for z in z_grid]
    pts = [(float(a), float(z)) for a, z in points]
    if not all(np.isfinite(v) for p in pts for v in p):
        raise ValueError("grid values must be finite")
    dims = (int(dims),) if np.isscalar(dims) else tuple(int(d) for d in dims)
    jobs = default_jobs() if jobs is None else max(1, int(jobs))
    tasks = [(a, z, dims, int(trials), int(seed)) for a, z in pts]
    if jobs == 1 or len(tasks) == 1:
        rows = [_scan_point(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            rows = list(ex.map(_scan_point, tasks))
    return DpiReport(rows, int(seed), dims)

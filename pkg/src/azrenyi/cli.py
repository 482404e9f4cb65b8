"""Command-line front end.

Matrices are exchanged as JSON::

    {"dim": 2, "entries": [[[0.5, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.5, 0.0]]], "label": "rho"}

where each entry is a ``[re, im]`` pair.  Data goes to stdout, diagnostics to
stderr.  Exit codes: 0 success, 1 other library error, 2 bad input,
3 support violation, 4 proven-region violation in a scan, 5 failed check.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import secrets
import sys
from typing import Sequence

import numpy as np

from . import channels, divergence, limits, propcheck
from .errors import AZError, SupportViolation
from .matkit import psd_eigh
from .states import RandomSpec, random_density

EXIT_ERROR, EXIT_PARSE, EXIT_SUPPORT, EXIT_SCAN, EXIT_CHECK = 1, 2, 3, 4, 5
HERM_TOL = 1e-8

PRESETS = ("rre", "qrd", "reverse-qrd", "relent", "dmin", "dmax", "z-inf")
LIMITS = ("alpha1", "alpha-inf", "alpha-neg-inf", "zero-zero")


class InputError(Exception):
    pass


# ------------------------------------------------------------- matrix files

def matrix_to_json(M, label: str | None = None) -> dict:
    M = np.asarray(M, dtype=complex)
    doc = {"dim": int(M.shape[0]),
           "entries": [[[float(x.real), float(x.imag)] for x in row] for row in M]}
    if label is not None:
        doc["label"] = label
    return doc


def matrix_from_json(doc, state: bool = True) -> np.ndarray:
    try:
        dim = int(doc["dim"])
        M = np.array([[complex(float(e[0]), float(e[1])) for e in row] for row in doc["entries"]])
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise InputError(f"malformed matrix document: {exc}") from None
    if M.shape != (dim, dim):
        raise InputError(f"entries have shape {M.shape}, expected ({dim}, {dim})")
    if not np.all(np.isfinite(M)):
        raise InputError("entries must be finite")
    if state and np.max(np.abs(M - M.conj().T), initial=0.0) > HERM_TOL:
        raise InputError("matrix is not Hermitian")
    return M


def read_matrix(path: str, state: bool = True) -> np.ndarray:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc.msg})") from None
    try:
        return matrix_from_json(doc, state)
    except InputError as exc:
        raise InputError(f"{path}: {exc}") from None


def write_matrix(path: str, M, label: str | None = None) -> None:
    text = json.dumps(matrix_to_json(M, label))
    if path == "-":
        print(text)
    else:
        with open(path, "w") as fh:
            fh.write(text + "\n")


def _rank(M) -> int:
    w, _, _ = psd_eigh(M)
    return int(np.count_nonzero(w))


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise InputError(f"bad number list {text!r}") from None


def _points(text: str) -> list[tuple[float, float]]:
    out = []
    for item in text.split(","):
        if not item.strip():
            continue
        try:
            a, z = item.split(":")
            out.append((float(a), float(z)))
        except ValueError:
            raise InputError(f"bad point {item!r}, expected alpha:z") from None
    return out


def _seed(args) -> int:
    if args.seed is None:
        args.seed = secrets.randbits(32)
        print(f"seed={args.seed}", file=sys.stderr)
    return args.seed


def _emit(record: dict, as_json: bool, value_key: str = "value_bits") -> None:
    if as_json:
        print(json.dumps(record, sort_keys=True))
    else:
        print(repr(float(record[value_key])))


# ----------------------------------------------------------------- commands

def cmd_compute(args) -> int:
    rho, sigma = read_matrix(args.rho), read_matrix(args.sigma)
    alpha, z, r = args.alpha, args.z, args.r
    route = "direct"
    if args.preset:
        needs_alpha = args.preset in ("rre", "qrd", "reverse-qrd", "z-inf")
        if needs_alpha and alpha is None:
            raise InputError(f"preset {args.preset} needs --alpha")
        p = args.preset
        if p == "relent":
            value, alpha, z, route = divergence.relative_entropy(rho, sigma), 1.0, None, "relative-entropy"
        elif p == "dmin":
            value, alpha, z = divergence.d_min(rho, sigma), 0.5, 0.5
        elif p == "dmax":
            value, alpha, z, route = divergence.d_max(rho, sigma), None, None, "max-relative-entropy"
        elif p == "rre":
            value, z = divergence.alpha_rre(rho, sigma, alpha), 1.0
        elif p == "qrd":
            value, z = divergence.qrd(rho, sigma, alpha), alpha
        elif p == "reverse-qrd":
            value, z = divergence.reverse_qrd(rho, sigma, alpha), 1 - alpha
        else:
            value, z, route = divergence.d_z_infinity(rho, sigma, alpha), None, "lie-trotter"
    else:
        if alpha is None or (z is None and r is None):
            raise InputError("give --preset, or --alpha with --z or --r")
        if z is None:
            z = r * (alpha - 1) + 0.0
        if abs(alpha - 1) < divergence.ALPHA1_WINDOW:
            route = "limit-alpha1" if (r is not None or abs(z) < divergence.Z0_WINDOW) else "relative-entropy"
        value = divergence.d_alpha_z(rho, sigma, alpha, z, r=r)
    record = {"quantity": args.preset or "d_alpha_z", "alpha": alpha, "z": z, "r": r,
              "value_bits": value, "route": route,
              "support_dim_rho": _rank(rho), "support_dim_sigma": _rank(sigma), "dim": len(rho),
              "continuity_regime": bool(alpha is None or alpha > 0)}
    _emit(record, args.json)
    return 0


def cmd_limit(args) -> int:
    rho, sigma = read_matrix(args.rho), read_matrix(args.sigma)
    w = args.which
    record: dict = {"limit": w}
    if w == "zero-zero":
        res = limits.limit_zero_zero(rho, sigma)
        record.update(value_bits=res.value, functional=res.functional,
                      pivots=",".join(str(i) for i in res.pivots_1based))
        if not args.json:
            print(repr(float(res.value)))
            print("pivots " + record["pivots"])
            return 0
    else:
        if args.r is None:
            raise InputError(f"limit {w} needs --r")
        record["r"] = args.r
        if w == "alpha1":
            record["side"] = args.side
            record["value_bits"] = limits.limit_alpha1(rho, sigma, args.r, side=args.side)
        elif w == "alpha-inf":
            record["value_bits"] = limits.limit_alpha_inf(rho, sigma, args.r)
        else:
            record["value_bits"] = limits.limit_alpha_neg_inf(rho, sigma, args.r)
    _emit(record, args.json)
    return 0


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def cmd_scan(args) -> int:
    seed = _seed(args)
    if args.kind == "dpi":
        if args.points:
            pts = _points(args.points)
        else:
            pts = [(a, z) for a in _floats(args.alpha_grid) for z in _floats(args.z_grid)]
        if not pts:
            raise InputError("empty grid")
        rep = channels.dpi_scan(None, points=pts, dims=args.dims, trials=args.trials, seed=seed, jobs=args.jobs)
        _write_text(args.out, rep.to_csv())
        if args.json_out:
            _write_text(args.json_out, rep.to_json() + "\n")
        summ = rep.summary()
        print(f"points={summ['points']} per_class={summ['per_class']} "
              f"proven_failures={summ['proven_failures']}", file=sys.stderr)
        return EXIT_SCAN if summ["proven_failures"] else 0

    ps, qs = _floats(args.p_grid), _floats(args.q_grid)
    if not ps or not qs:
        raise InputError("empty grid")
    rows, bad = [], 0
    mx = lambda r: max((f["magnitude"] for f in r.failures), default=0.0)
    for p in ps:
        for q in qs:
            cc = propcheck.concavity_suite(p, q, args.dims, args.trials, seed, jobs=args.jobs)
            cv = propcheck.convexity_conjecture_suite(p, q, args.dims, args.trials, seed, jobs=args.jobs)
            region = cc.extra["region"]
            if (region == "concave-proven" and cc.failures) or (region == "convex-proven" and cv.failures):
                bad += 1
            worst = (cc.failures or cv.failures or [{"seed": ""}])[0]["seed"]
            rows.append([repr(p), repr(q), region, args.trials, len(cc.failures), len(cv.failures),
                         repr(mx(cc)), repr(mx(cv)), worst])
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["p", "q", "region_class", "trials", "concavity_failures", "convexity_failures",
                 "max_concavity_violation", "max_convexity_violation", "worst_seed"])
    wr.writerows(rows)
    _write_text(args.out, buf.getvalue())
    counts: dict = {}
    for row in rows:
        counts[row[2]] = counts.get(row[2], 0) + 1
    print(f"points={len(rows)} per_class={counts} proven_failures={bad}", file=sys.stderr)
    return EXIT_SCAN if bad else 0


_SEGMENT_PAIRS = (
    ((-math.pi / 2, math.pi / 2), (-math.pi / 2, math.pi / 2)),
    ((0.1, 1.2), (-2.0, 0.4)),
    ((-math.pi / 4, math.pi / 4), (-math.pi / 3, math.pi / 2)),
)
CHECKS = ("axioms", "approximation-lemma", "resolvent-bounds", "segment-spectrum", "concavity", "convexity")


def _run_check(name: str, args) -> list:
    seed, trials, jobs = args.seed, args.trials, args.jobs
    if name == "axioms":
        return [propcheck.axiom_suite(trials=trials or 100, seed=seed, jobs=jobs)]
    if name == "approximation-lemma":
        alphas = args.alpha or [0.5, 0.9, 0.99]
        return [propcheck.approximation_lemma_suite(trials=trials or 500, seed=seed, alpha_list=alphas, jobs=jobs)]
    if name == "resolvent-bounds":
        return [propcheck.resolvent_bound_suite(trials=trials or 200, seed=seed, jobs=jobs)]
    if name == "segment-spectrum":
        return [propcheck.segment_spectrum_suite(propcheck.ComplexSegment(*a), propcheck.ComplexSegment(*b),
                                                 trials=trials or 300, seed=seed, jobs=jobs)
                for a, b in _SEGMENT_PAIRS]
    if name == "concavity":
        return [propcheck.concavity_suite(p, q, trials=trials or 100, seed=seed, jobs=jobs)
                for p, q in ((0.5, 0.5), (1.0, 0.3), (0.2, 0.9), (1.0, 1.0))]
    if name == "convexity":
        return [propcheck.convexity_conjecture_suite(p, q, trials=trials or 100, seed=seed, jobs=jobs)
                for p, q in ((1.5, -0.5), (-0.5, 1.5), (1.0, -0.3), (-0.5, 1.7))]
    raise InputError(f"unknown suite {name!r}; choose from {', '.join(CHECKS)} or all")


def cmd_check(args) -> int:
    if args.seed is None:
        args.seed = 0
    names = list(CHECKS) if "all" in args.suites else args.suites
    results = []
    for n in names:
        results.extend(_run_check(n, args))
    for r in results:
        print(r.summary_line(), file=sys.stderr)
    report = {"seed": args.seed, "suites": [r.to_dict() for r in results],
              "ok": all(r.ok for r in results)}
    text = json.dumps(report, indent=2, sort_keys=True, default=float) + "\n"
    _write_text(args.out, text)
    return 0 if report["ok"] else EXIT_CHECK


def cmd_random_state(args) -> int:
    seed = _seed(args)
    rho = random_density(RandomSpec(args.dim, args.rank, seed))
    write_matrix(args.out, rho, args.label or f"random(dim={args.dim},rank={args.rank},seed={seed})")
    return 0


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="azrenyi", description="alpha-z relative Renyi entropies")
    sub = ap.add_subparsers(dest="command", required=True)
    jobs_default = channels.default_jobs()

    c = sub.add_parser("compute", help="evaluate a divergence")
    c.add_argument("rho")
    c.add_argument("sigma")
    c.add_argument("--preset", choices=PRESETS)
    c.add_argument("--alpha", type=float)
    c.add_argument("--z", type=float)
    c.add_argument("--r", type=float, help="slope for z = r (alpha - 1)")
    c.add_argument("--json", action="store_true", help="print a JSON record")
    c.set_defaults(func=cmd_compute)

    lm = sub.add_parser("limit", help="evaluate a closed-form limit")
    lm.add_argument("rho")
    lm.add_argument("sigma")
    lm.add_argument("--which", choices=LIMITS, required=True)
    lm.add_argument("--r", type=float)
    lm.add_argument("--side", type=int, choices=(-1, 1))
    lm.add_argument("--json", action="store_true")
    lm.set_defaults(func=cmd_limit)

    sc = sub.add_parser("scan", help="randomized DPI or concavity scan, CSV output")
    sc.add_argument("kind", choices=("dpi", "concavity"))
    sc.add_argument("--alpha-grid", default="0.5,1,2")
    sc.add_argument("--z-grid", default="0.5,1,2")
    sc.add_argument("--points", help="explicit alpha:z list, overrides the grids")
    sc.add_argument("--p-grid", default="0.25,0.5,0.75,1")
    sc.add_argument("--q-grid", default="0.25,0.5,0.75,1")
    sc.add_argument("--dims", type=int, default=3)
    sc.add_argument("--trials", type=int, default=100)
    sc.add_argument("--seed", type=int)
    sc.add_argument("--out", help="CSV path (default stdout)")
    sc.add_argument("--json-out", help="also write the DPI report as JSON")
    sc.add_argument("--jobs", type=int, default=jobs_default)
    sc.set_defaults(func=cmd_scan)

    ck = sub.add_parser("check", help="run verification suites")
    ck.add_argument("suites", nargs="+", metavar="suite", help=f"{', '.join(CHECKS)} or all")
    ck.add_argument("--seed", type=int)
    ck.add_argument("--trials", type=int)
    ck.add_argument("--alpha", type=float, action="append", help="alpha for approximation-lemma (repeatable)")
    ck.add_argument("--out", help="JSON report path (default stdout)")
    ck.add_argument("--jobs", type=int, default=jobs_default)
    ck.set_defaults(func=cmd_check)

    rs = sub.add_parser("random-state", help="write a random density matrix")
    rs.add_argument("--dim", type=int, required=True)
    rs.add_argument("--rank", type=int)
    rs.add_argument("--seed", type=int)
    rs.add_argument("--label")
    rs.add_argument("--out", default="-")
    rs.set_defaults(func=cmd_random_state)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except SupportViolation as exc:
        print(f"error: support precondition failed: {exc}", file=sys.stderr)
        return EXIT_SUPPORT
    except AZError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())

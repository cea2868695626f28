"""Command-line front end.

Exit codes: 0 on completion (any verdict), 2 on invalid input, 3 on numeric failure.
"""
from __future__ import annotations

import argparse
import csv
import io as _io
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import io
from .coefficients import cusp_holonomy_verdict
from .cusps import (
    GenCuspSpec,
    boundary_simplex,
    genrep_homomorphism_residuals,
    genrep_invariance_residuals,
    horosphere_hessian_check,
)
from .domains import OracleError, PHI_FUNCTIONS, hilbert_distance, smooth_domain
from .gallery import GALLERY
from .groups import SampleBudgetError, divergence_diagnostics, enumerate_words, limit_flags
from .lp import LPError
from .numeric import to_float

log = logging.getLogger("cuspcert")

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3
CERTIFY_CSV_COLUMNS = ("word_length", "min_sigma1_over_sigma2", "max_entry_norm")
HIST_EDGES = [0.0, 1e-15, 1e-14, 1e-13, 1e-12, 1e-11, 1e-10, 1e-9, 1e-6, np.inf]


class InputError(Exception):
    pass


def _csv_text(header, rows) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in r])
    return buf.getvalue()


def _histogram(values) -> dict:
    counts, _ = np.histogram(np.asarray(values, dtype=float), bins=HIST_EDGES)
    return {"edges": [str(e) if not np.isfinite(e) else e for e in HIST_EDGES],
            "counts": counts.tolist(), "max": float(np.max(values)) if len(values) else 0.0}


def _load_group(path):
    try:
        return io.group_from_json(io.read_json(path))
    except OSError as e:
        raise InputError(f"cannot read {path}: {e}") from e
    except io.FormatError as e:
        raise InputError(str(e)) from e


def _load_domain(path):
    try:
        return io.domain_from_json(io.read_json(path))
    except OSError as e:
        raise InputError(f"cannot read {path}: {e}") from e
    except (io.FormatError, KeyError, TypeError, ValueError) as e:
        raise InputError(f"{path}: {e}") from e


def _floats(text: str, what: str) -> list[float]:
    if text.strip() == "":
        return []
    try:
        return [float(x) for x in text.split(",")]
    except ValueError as e:
        raise InputError(f"{what} must be a comma-separated list of numbers") from e


# ---------------------------------------------------------------- commands


def cmd_certify(args) -> int:
    G = _load_group(args.group)
    if args.max_word_length < 1:
        raise InputError("--max-word-length must be >= 1")
    t0 = time.perf_counter()
    samples = enumerate_words(G, args.max_word_length)
    t1 = time.perf_counter()
    hv = cusp_holonomy_verdict(G, args.max_word_length, seed=args.seed, samples=samples)
    t2 = time.perf_counter()
    div = divergence_diagnostics(samples)
    flags = limit_flags(samples)
    div.limit_data = flags
    t3 = time.perf_counter()
    timings = {"enumerate": t1 - t0, "conditions": t2 - t1, "divergence": t3 - t2}
    report = io.CertificationReport(io.group_to_json(G), hv.verdicts, hv.summary, div, flags,
                                    {k: round(v, 6) for k, v in timings.items()}, args.seed)
    text = io.json.dumps(report.to_json(), indent=2, allow_nan=False) + "\n"
    if args.out:
        io.atomic_write_text(args.out, text)
    else:
        sys.stdout.write(text)
    if args.csv:
        rows = zip(div.lengths, div.min_ratios.get(1, [1.0] * len(div.lengths)), div.max_norms)
        io.atomic_write_text(args.csv, _csv_text(CERTIFY_CSV_COLUMNS, rows))
    log.info("summary: %s", hv.summary)
    return EXIT_OK


def cmd_build_cusp(args) -> int:
    G = _load_group(args.rho)
    psi = _floats(args.psi, "--psi")
    if args.phi not in PHI_FUNCTIONS:
        raise InputError(f"unknown phi {args.phi!r}")
    try:
        spec = GenCuspSpec(args.s, psi, G, PHI_FUNCTIONS[args.phi]())
    except ValueError as e:
        raise InputError(str(e)) from e
    rng = np.random.default_rng(args.seed)
    inv = genrep_invariance_residuals(spec, args.samples, rng)
    hom = genrep_homomorphism_residuals(spec, args.samples, rng) if G.closed_form is not None else None
    hess = []
    for _ in range(args.samples):
        U = np.exp(rng.normal(size=spec.s))
        V = rng.normal(size=spec.n - 2)
        hess.append(horosphere_hessian_check(spec, U, V))
    hess = np.array(hess)
    simplex = boundary_simplex(spec)
    report = {
        "spec": io.cusp_spec_to_json(spec, str(args.rho)),
        "seed": args.seed,
        "dim": spec.dim,
        "invariance_residuals": _histogram(inv),
        "homomorphism_residuals": None if hom is None else _histogram(hom),
        "hessian_min_eigenvalue": {"min": float(hess.min()) if hess.size and np.isfinite(hess).all() else None,
                                   "count": int(hess.size), "all_positive": bool(np.all(hess > 0))},
        "boundary_simplex": {"vertices": [v.as_float().tolist() for v in simplex.vertices], "c1": simplex.c1},
        "strictly_convex_cusp": spec.s == 0,
    }
    io.write_json(args.out, report)
    return EXIT_OK


def cmd_gallery(args) -> int:
    if args.name not in GALLERY:
        raise InputError(f"unknown gallery group {args.name!r}; known: {', '.join(sorted(GALLERY))}")
    params = {}
    for p in args.param or []:
        key, sep, val = p.partition("=")
        if not sep:
            raise InputError(f"--param expects k=v, got {p!r}")
        try:
            params[key] = int(val)
        except ValueError as e:
            raise InputError(f"--param {key} must be an integer") from e
    try:
        G = GALLERY[args.name].build(**params)
    except ValueError as e:
        raise InputError(str(e)) from e
    text = io.json.dumps(io.group_to_json(G), indent=2) + "\n"
    if args.out:
        io.atomic_write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _read_pairs(path, dim: int) -> list[tuple[np.ndarray, np.ndarray]]:
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    except OSError as e:
        raise InputError(f"cannot read {path}: {e}") from e
    pairs = []
    for i, r in enumerate(rows):
        try:
            vals = [float(c) for c in r]
        except ValueError:
            if i == 0:
                continue  # header
            raise InputError(f"{path}: row {i + 1} is not numeric")
        if len(vals) != 2 * dim:
            raise InputError(f"{path}: row {i + 1} needs {2 * dim} numbers (x then y)")
        pairs.append((np.array(vals[:dim]), np.array(vals[dim:])))
    return pairs


def cmd_hilbert(args) -> int:
    D = _load_domain(args.domain)
    pairs = _read_pairs(args.pairs, D.dim)
    rows = []
    for x, y in pairs:
        if not (D.contains(x) and D.contains(y)):
            raise InputError(f"pair {x.tolist()}, {y.tolist()} not inside the domain")
        rows.append([*x, *y, hilbert_distance(D, x, y)])
    header = [f"x{i + 1}" for i in range(D.dim)] + [f"y{i + 1}" for i in range(D.dim)] + ["d"]
    io.atomic_write_text(args.out, _csv_text(header, rows))
    return EXIT_OK


def cmd_smooth(args) -> int:
    D = _load_domain(args.domain)
    H = _floats(args.support, "--support")
    if len(H) != D.dim + 1:
        raise InputError(f"--support needs {D.dim + 1} coordinates")
    if args.samples < 1:
        raise InputError("--samples must be >= 1")
    try:
        S = smooth_domain(D, np.array(H), args.level)
    except ValueError as e:
        raise InputError(str(e)) from e
    pts = S.sample_boundary(args.samples, np.random.default_rng(args.seed))
    rows = [[*p, S.level_value(p)] for p in pts]
    header = [f"y{i + 1}" for i in range(D.dim)] + ["level"]
    io.atomic_write_text(args.out, _csv_text(header, rows))
    return EXIT_OK


# ---------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cuspcert", description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0, help="random seed for all sampling (default 0)")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
        p.set_defaults(func=func)
        return p

    p = add("certify", cmd_certify, "run the condition checkers on a group file")
    p.add_argument("group")
    p.add_argument("--max-word-length", "-L", type=int, default=12)
    p.add_argument("--out")
    p.add_argument("--csv")

    p = add("build-cusp", cmd_build_cusp, "build genRep data and run the cusp suites")
    p.add_argument("--rho", required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--psi", default="")
    p.add_argument("--phi", default="quadratic")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--out", required=True)

    p = add("gallery", cmd_gallery, "export a gallery group as JSON")
    p.add_argument("name")
    p.add_argument("--param", action="append", metavar="K=V")
    p.add_argument("--out")

    p = add("hilbert", cmd_hilbert, "Hilbert distances for point pairs")
    p.add_argument("--domain", required=True)
    p.add_argument("--pairs", required=True)
    p.add_argument("--out", required=True)

    p = add("smooth", cmd_smooth, "sample the boundary of a smoothed domain")
    p.add_argument("--domain", required=True)
    p.add_argument("--support", required=True)
    p.add_argument("--level", type=float, required=True)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--out", required=True)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT if e.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (OracleError, LPError, SampleBudgetError, np.linalg.LinAlgError, FloatingPointError,
            OverflowError) as e:
        print(f"numeric failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

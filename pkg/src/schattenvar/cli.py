"""Command line: estimate, variance, bounds, validate.

Exit codes: 0 success, 2 input error, 3 size guard, 4 validation failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import GAUSSIAN_KAPPA, bound_report
from .errors import InputError, SchattenError
from .montecarlo import SketchConfig, estimate_vpn, run_experiment, sample_sketch
from .spectrum import Spectrum, gram_spectrum, load_matrix_csv, load_spectrum_json, table_for
from .validate import run_validation
from .variance import (
    brute_variance,
    exact_variance,
    oracle_class_variance,
    paper_literal_report,
)

EXIT_OK, EXIT_INPUT, EXIT_GUARD, EXIT_VALIDATION = 0, 2, 3, 4


def _sha256(path: str) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def manifest(subcommand: str, params: dict, inputs: list[str], seed) -> dict:
    return {
        "tool": "schattenvar",
        "version": __version__,
        "subcommand": subcommand,
        "parameters": params,
        "inputs": {p: _sha256(p) for p in inputs},
        "seed": seed,
    }


def _json_safe(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, np.generic):
        return _json_safe(obj.item())
    return obj


def _flatten(obj, prefix=""):
    out = {}
    for k, v in obj.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        elif not isinstance(v, list):
            out[key] = v
    return out


def emit(report: dict, fmt: str, out, rows: list[dict] | None = None) -> None:
    report = _json_safe(report)
    if fmt == "json":
        out.write(json.dumps(report, indent=2, sort_keys=True) + "\n")
    elif fmt == "csv":
        rows = rows if rows is not None else [_flatten({k: v for k, v in report.items() if k != "manifest"})]
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\r\n")
        writer.writeheader()
        writer.writerows(_json_safe(rows))
        out.write(buf.getvalue())
    else:
        for k, v in _flatten({k: v for k, v in report.items() if k != "manifest"}).items():
            out.write(f"{k}: {v}\n")
        for key in ("checks", "errata", "per_q", "bounds"):
            for item in report.get(key, []):
                out.write(f"{key}: " + ", ".join(f"{a}={b}" for a, b in _flatten(item).items()) + "\n")


def _load_input(args) -> tuple[Spectrum, list[str], np.ndarray | None]:
    if getattr(args, "matrix", None):
        B = load_matrix_csv(args.matrix)
        return gram_spectrum(B), [args.matrix], B
    if getattr(args, "spectrum", None):
        return load_spectrum_json(args.spectrum), [args.spectrum], None
    raise InputError("one of --matrix or --spectrum is required")


def _require_n_ge_p(p: int, n: int) -> None:
    if p < 1:
        raise InputError("p must be >= 1")
    if n < p:
        raise InputError(f"n must be ≥ p (got n={n}, p={p})")


def cmd_estimate(args, out) -> int:
    _require_n_ge_p(args.p, args.n)
    spec, inputs, B = _load_input(args)
    t = table_for(spec, args.p)
    report = {"p": args.p, "n": args.n, "d": spec.d, "target": t[args.p]}
    if args.reps is None:
        X = sample_sketch(args.n, spec.d, args.seed)
        S = B.T @ B if B is not None else spec
        report["estimate"] = estimate_vpn(X, S, args.p)
    else:
        stats = run_experiment(SketchConfig(args.p, args.n, args.seed, args.reps, spec), threads=args.threads)
        report["stats"] = stats.to_dict()
    params = {"p": args.p, "n": args.n, "reps": args.reps}
    report["manifest"] = manifest("estimate", params, inputs, args.seed)
    emit(report, args.format, out)
    return EXIT_OK


def cmd_variance(args, out) -> int:
    _require_n_ge_p(args.p, args.n)
    spec, inputs, _ = _load_input(args)
    t = table_for(spec, args.p)
    if args.method == "brute":
        var = brute_variance(args.p, args.n, spec)
        mean = t[args.p]
        report = {"p": args.p, "n": args.n, "d": spec.d, "mean": mean,
                  "second_moment": var + mean**2, "variance": var, "per_q": []}
    elif args.method == "oracle":
        report = oracle_class_variance(args.p, args.n, spec).to_dict()
    else:
        report = exact_variance(args.p, args.n, t).to_dict()
        if args.method == "paper-literal":
            normative = report["variance"]
            report = paper_literal_report(args.p, args.n, t).to_dict()
            report["recursion_variance"] = normative
            report["discrepancy"] = report["variance"] - normative
            report["note"] = ("printed variance representation evaluated verbatim; beta partial sums "
                              "taken over folded pair arguments; differs from the recursion for q >= 2")
    report["method"] = args.method
    params = {"p": args.p, "n": args.n, "method": args.method}
    report["manifest"] = manifest("variance", params, inputs, None)
    emit(report, args.format, out)
    return EXIT_OK


def _parse_range(text: str) -> list[int]:
    try:
        if ":" in text:
            lo, hi = (int(x) for x in text.split(":"))
            return list(range(lo, hi + 1))
        return [int(x) for x in text.split(",")]
    except ValueError as exc:
        raise InputError(f"bad range {text!r}; use LO:HI or a,b,c") from exc


def cmd_bounds(args, out) -> int:
    inputs: list[str] = []
    rows = []
    if args.grid:
        ps, ns, ds = (_parse_range(x) for x in args.grid)
        rng = np.random.default_rng(args.seed) if args.grid_spectrum == "uniform" else None
        for p in ps:
            for n in ns:
                if n < p:
                    continue
                for d in ds:
                    spec = Spectrum.from_values(rng.uniform(0, 1, d)) if rng is not None else Spectrum.identity(d)
                    rows.append(bound_report(spec, p, n, args.kappa).to_dict())
    else:
        _require_n_ge_p(args.p, args.n)
        spec, inputs, _ = _load_input(args)
        rows.append(bound_report(spec, args.p, args.n, args.kappa).to_dict())
    params = {"p": args.p, "n": args.n, "kappa": args.kappa, "grid": args.grid,
              "grid_spectrum": args.grid_spectrum if args.grid else None}
    report = {"bounds": rows, "manifest": manifest("bounds", params, inputs, args.seed if args.grid else None)}
    columns = ["p", "n", "d", "b1", "b2", "b3", "b4", "new_bound", "kv_bound", "exact_variance", "slack", "ratio"]
    emit(report, args.format, out, rows=[{c: r[c] for c in columns} for r in rows])
    return EXIT_OK


def cmd_validate(args, out) -> int:
    spec = None
    inputs: list[str] = []
    if args.spectrum:
        spec = load_spectrum_json(args.spectrum)
        inputs = [args.spectrum]
    _require_n_ge_p(args.p, args.n)
    result = run_validation(args.p, args.n, args.d, args.reps, args.seed, args.threads, spec)
    params = {"p": args.p, "n": args.n, "d": spec.d if spec else args.d, "reps": args.reps}
    result["manifest"] = manifest("validate", params, inputs, args.seed)
    emit(result, args.format, out)
    return EXIT_OK if result["passed"] else EXIT_VALIDATION


def _threads_default() -> int:
    try:
        return max(1, int(os.environ.get("SCHATTEN_THREADS", "1")))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="schattenvar", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["json", "text", "csv"], default="json")
    common.add_argument("--output", "-o", help="write the report here instead of stdout")
    common.add_argument("--threads", type=int, default=_threads_default(),
                        help="worker threads (default: $SCHATTEN_THREADS or 1); never changes results")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_input(p, required=True):
        g = p.add_mutually_exclusive_group(required=required)
        g.add_argument("--matrix", help="CSV matrix B, one row per line")
        g.add_argument("--spectrum", help="JSON array of eigenvalues of S = B^T B")

    est = sub.add_parser("estimate", parents=[common], help="sample the estimator V_p^n")
    add_input(est)
    est.add_argument("--p", type=int, required=True)
    est.add_argument("--n", type=int, required=True)
    est.add_argument("--seed", type=int, required=True)
    est.add_argument("--reps", type=int)
    est.set_defaults(func=cmd_estimate)

    var = sub.add_parser("variance", parents=[common], help="exact variance of V_p^n")
    add_input(var)
    var.add_argument("--p", type=int, required=True)
    var.add_argument("--n", type=int, required=True)
    var.add_argument("--method", choices=["recursion", "paper-literal", "brute", "oracle"], default="recursion")
    var.set_defaults(func=cmd_variance)

    bnd = sub.add_parser("bounds", parents=[common], help="new and KV variance bounds")
    add_input(bnd, required=False)
    bnd.add_argument("--p", type=int)
    bnd.add_argument("--n", type=int)
    bnd.add_argument("--kappa", type=float, default=GAUSSIAN_KAPPA)
    bnd.add_argument("--grid", nargs=3, metavar=("P", "N", "D"),
                     help="sweep ranges, each LO:HI or a,b,c; emits one row per (p, n, d)")
    bnd.add_argument("--grid-spectrum", choices=["identity", "uniform"], default="identity")
    bnd.add_argument("--seed", type=int, default=0, help="seed for --grid-spectrum uniform")
    bnd.set_defaults(func=cmd_bounds)

    val = sub.add_parser("validate", parents=[common], help="run the validation suite")
    val.add_argument("--p", type=int, default=2)
    val.add_argument("--n", type=int, default=6)
    val.add_argument("--d", type=int, default=3)
    val.add_argument("--reps", type=int, default=200_000)
    val.add_argument("--seed", type=int, default=0)
    val.add_argument("--spectrum", help="JSON spectrum (default: identity of dimension d)")
    val.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "bounds" and not args.grid and (args.p is None or args.n is None):
        parser.error("bounds needs --p and --n unless --grid is given")
    out = open(args.output, "w", encoding="utf-8", newline="") if args.output else sys.stdout
    try:
        return args.func(args, out)
    except SchattenError as exc:
        print(f"schattenvar: error: {exc}", file=sys.stderr)
        return exc.exit_code
    finally:
        if args.output:
            out.close()


if __name__ == "__main__":
    sys.exit(main())

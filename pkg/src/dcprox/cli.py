"""Command line front end.

Subcommands: ``gen`` writes a synthetic dataset to JSON, ``ref`` computes a
reference objective value for a run configuration, ``bench`` runs the full
(solver, seed) matrix and writes trace/summary files, ``check`` audits trace
and summary CSVs.  Exit codes: 0 success, 2 configuration error, 3 solver or
audit failure.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .bench import (ConfigError, RunConfig, read_summary_csv, read_trace_csv,
                    run_matrix, run_reference)
from .datasets import gen_logreg, gen_poisson_cs, save_dataset_json
from .linesearch import LineSearchError


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dcprox",
                                     description="difference-of-convex proximal solvers")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a synthetic dataset")
    gen.add_argument("--kind", required=True,
                     choices=["logreg-synthetic", "poisson-synthetic"])
    gen.add_argument("--m", type=int, required=True, help="number of rows")
    gen.add_argument("--n", type=int, required=True, help="number of columns")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)
    gen.add_argument("--lambda", dest="lam", type=float, default=1e-3)
    gen.add_argument("--sparsity", type=float, default=0.1,
                     help="support fraction of the planted vector")
    gen.add_argument("--noise-rate", type=float, default=0.05,
                     help="label flip probability (logistic only)")
    gen.add_argument("--scale-decades", type=float, default=2.0,
                     help="column scale spread in decades (logistic only)")
    gen.add_argument("--k-nonzeros", type=int, default=20,
                     help="spike count (poisson only)")
    gen.add_argument("--amp-max", type=float, default=1e5)
    gen.add_argument("--p", type=float, default=0.9,
                     help="sensing matrix density (poisson only)")
    gen.add_argument("--bg", type=float, default=1e-10)
    gen.set_defaults(func=_cmd_gen)

    ref = sub.add_parser("ref", help="compute the reference objective value")
    ref.add_argument("--config", required=True)
    ref.add_argument("--out", default=None, help="optional JSON output path")
    ref.set_defaults(func=_cmd_ref)

    bench = sub.add_parser("bench", help="run the solver-by-seed matrix")
    bench.add_argument("--config", required=True)
    bench.add_argument("--seed", type=int, action="append", default=None,
                       help="replace the configured seed list (repeatable)")
    bench.add_argument("--out", default=None, help="output directory")
    bench.add_argument("--max-iter", type=int, default=None)
    bench.add_argument("--tol", type=float, action="append", default=None,
                       help="replace the configured tolerance grid (repeatable)")
    bench.set_defaults(func=_cmd_bench)

    check = sub.add_parser("check", help="audit trace and summary CSVs")
    check.add_argument("--trace", action="append", default=[],
                       help="trace CSV to audit (repeatable)")
    check.add_argument("--summary", action="append", default=[],
                       help="summary CSV to audit (repeatable)")
    check.set_defaults(func=_cmd_check)
    return parser


def _load_config(path, args=None) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    if args is not None:
        if getattr(args, "seed", None):
            raw["seeds"] = list(args.seed)
        if getattr(args, "out", None):
            raw["out_dir"] = args.out
        if getattr(args, "max_iter", None):
            raw["max_iter"] = args.max_iter
        if getattr(args, "tol", None):
            raw["tolerances"] = sorted(set(args.tol), reverse=True)
    return RunConfig.from_dict(raw)


def _cmd_gen(args) -> int:
    if args.kind == "logreg-synthetic":
        data, truth = gen_logreg(args.m, args.n,
                                 sparsity_of_truth=args.sparsity,
                                 noise_rate=args.noise_rate, rng=args.seed,
                                 lam=args.lam, scale_decades=args.scale_decades)
        params = {"m": args.m, "n": args.n, "seed": args.seed,
                  "sparsity_of_truth": args.sparsity,
                  "noise_rate": args.noise_rate,
                  "scale_decades": args.scale_decades}
        save_dataset_json(args.out, "logreg", data, truth, params)
    else:
        data, truth = gen_poisson_cs(n=args.n, m=args.m,
                                     k_nonzeros=args.k_nonzeros,
                                     amp_max=args.amp_max, p=args.p,
                                     bg=args.bg, rng=args.seed, lam=args.lam)
        params = {"m": args.m, "n": args.n, "seed": args.seed,
                  "k_nonzeros": args.k_nonzeros, "amp_max": args.amp_max,
                  "p": args.p}
        save_dataset_json(args.out, "poisson-cs", data, truth, params)
    print(f"wrote {args.kind} dataset to {args.out}")
    return 0


def _cmd_ref(args) -> int:
    config = _load_config(args.config)
    value = run_reference(config)
    print(repr(value))
    if args.out:
        with open(args.out, "w", encoding="ascii") as fh:
            json.dump({"reference": value}, fh)
    return 0


def _cmd_bench(args) -> int:
    config = _load_config(args.config, args)
    result = run_matrix(config)
    for row in result.summary:
        iters = "Max" if row.mean_iterations is None else f"{row.mean_iterations:.1f}"
        secs = "-" if row.mean_seconds is None else f"{row.mean_seconds:.3f}"
        flag = " (some seeds capped)" if row.max_flag and row.mean_iterations is not None else ""
        print(f"{row.solver:>8}  tol={row.tol:g}  iters={iters}  "
              f"seconds={secs}  hit_rate={row.hit_rate:.2f}{flag}")
    return 0


def _audit_trace(path) -> list:
    failures = []
    trace = read_trace_csv(path)
    if not trace:
        return [f"{path}: empty trace"]

    ks = [rec.k for rec in trace]
    if all(b > a for a, b in zip(ks, ks[1:])):
        print(f"check {path}: iteration-counter-increasing ok")
    else:
        failures.append(f"{path}: iteration counter not increasing")

    if all(np.isfinite(rec.F_value) for rec in trace):
        print(f"check {path}: objective-finite ok")
    else:
        failures.append(f"{path}: non-finite objective value")

    if all(abs(rec.t * rec.L_accepted - 1.0) <= 1e-9 for rec in trace):
        print(f"check {path}: step-size-consistent ok")
    else:
        failures.append(f"{path}: step size inconsistent with accepted L")

    if all(rec.n_backtracks >= 0 for rec in trace):
        print(f"check {path}: backtrack-count-nonnegative ok")
    else:
        failures.append(f"{path}: negative backtrack count")
    return failures


def _audit_summary(path) -> list:
    failures = []
    rows = read_summary_csv(path)
    by_solver = {}
    for row in rows:
        by_solver.setdefault(row.solver, []).append(row)
    ok = True
    for solver, group in by_solver.items():
        group = sorted(group, key=lambda r: -r.tol)  # loosest first
        present = [r.mean_iterations for r in group if r.mean_iterations is not None]
        if any(b < a for a, b in zip(present, present[1:])):
            ok = False
            failures.append(f"{path}: first-hit iterations decrease as {solver} "
                            "tolerance tightens")
        rates = [r.hit_rate for r in group]
        if any(b > a for a, b in zip(rates, rates[1:])):
            ok = False
            failures.append(f"{path}: hit rate increases as {solver} tolerance tightens")
    if ok:
        print(f"check {path}: first-hit-monotone ok")
    return failures


def _cmd_check(args) -> int:
    if not args.trace and not args.summary:
        raise ConfigError("check needs at least one --trace or --summary")
    failures = []
    for path in args.trace:
        try:
            failures.extend(_audit_trace(path))
        except (OSError, ValueError) as exc:
            failures.append(f"{path}: unreadable trace ({exc})")
    for path in args.summary:
        try:
            failures.extend(_audit_summary(path))
        except (OSError, ValueError) as exc:
            failures.append(f"{path}: unreadable summary ({exc})")
    for line in failures:
        print(f"check FAIL {line}", file=sys.stderr)
    return 3 if failures else 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except LineSearchError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

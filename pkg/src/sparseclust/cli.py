"""Command-line entry point: ``sparseclust <subcommand> ...``.

Exit codes: 0 success, 2 invalid input or configuration, 3 file errors,
4 numerical degeneracy.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from ._utils import DegenerateError
from .benchmark import ALL_METHODS, BENCH_COLUMNS, PLAIN_METHODS, estimate_plain_k, run_benchmark
from .fileio import load_csv, write_csv, write_report, write_truth, write_tsv
from .indices import METHODS as INDEX_METHODS
from .indices import select
from .selection import SelectionConfig, estimate
from .simgen import DESIGNS, generate

EXIT_OK, EXIT_INVALID, EXIT_IO, EXIT_DEGENERATE = 0, 2, 3, 4

SPARSE_METHODS = {"s4": "S4", "gap": "GapJoint", "ps": "PsJoint", "s4-naive": "S4NaiveSum"}


class UsageError(ValueError):
    pass


def _parse_params(text):
    """``k=v,k=v`` with ints, floats, and ``a:b`` tuples."""
    out = {}
    if not text:
        return out
    for item in text.split(","):
        if "=" not in item:
            raise UsageError(f"bad --params entry {item!r}; expected key=value")
        key, val = item.split("=", 1)
        parts = val.split(":")
        nums = []
        for v in parts:
            try:
                nums.append(int(v))
            except ValueError:
                try:
                    nums.append(float(v))
                except ValueError:
                    raise UsageError(f"--params {key}: {v!r} is not a number") from None
        out[key.strip()] = tuple(float(x) for x in nums) if len(nums) > 1 else nums[0]
    return out


def _check_range(k_min, k_max, n):
    if k_min < 1 or k_max < k_min:
        raise UsageError(f"invalid k range [{k_min}, {k_max}]")
    if k_max >= n:
        raise UsageError(f"k_max={k_max} must be below the number of samples n={n}")


def cmd_estimate_k(args):
    data = load_csv(args.input, args.header)
    X = data.X
    _check_range(args.k_min, args.k_max, X.shape[0])
    if not 0 < args.f < 1:
        raise UsageError(f"f must lie in (0, 1), got {args.f}")
    k_hat, payload = estimate_plain_k(args.method, X, args.k_min, args.k_max, B=args.B,
                                      f=args.f, rho=args.rho, s0=args.s0,
                                      restarts=args.restarts, n_splits=args.n_splits,
                                      seed=args.seed, threads=args.threads)
    body = {"method": args.method, "k_hat": k_hat, "seed": args.seed,
            "config": {k: getattr(args, k) for k in ("k_min", "k_max", "B", "f", "rho", "s0",
                                                      "restarts", "n_splits", "threads")},
            **payload}
    if args.out:
        write_report(args.out, "estimate-k", body)
    print(f"k_hat\t{k_hat}")


def cmd_sparse_estimate(args):
    data = load_csv(args.input, args.header)
    X = data.X
    cfg = SelectionConfig(k_min=args.k_min, k_max=args.k_max, f=args.f, B=args.B, rho=args.rho,
                          restarts=args.restarts, n_splits=args.n_splits, lambda0=args.lambda0,
                          grid_m=args.grid_m, seed=args.seed, threads=args.threads)
    cfg.validate(X.shape[0])
    rep = estimate(SPARSE_METHODS[args.method], X, cfg)
    body = {"method": rep.method, "k_hat": rep.k_hat, "lambda_hat": rep.lambda_hat,
            "n_selected": rep.n_selected_at_choice, "seed": rep.seed,
            "runtime_seconds": rep.runtime, "config": cfg.__dict__,
            "labels": rep.labels, "selected_features": np.flatnonzero(rep.mask),
            "table": rep.table}
    if args.out:
        write_report(args.out, "sparse-estimate", body)
    if args.table:
        write_tsv(args.table, rep.table)
    print(f"k_hat\t{rep.k_hat}\nlambda_hat\t{rep.lambda_hat!r}\nn_selected\t"
          f"{rep.n_selected_at_choice}")


def cmd_simulate(args):
    params = _parse_params(args.params)
    try:
        d = generate(args.design, args.seed, **params)
    except TypeError as exc:
        raise UsageError(f"bad design parameters: {exc}") from None
    write_csv(args.out, d.X)
    if args.truth:
        if d.truth is None:
            write_truth(args.truth, np.zeros(d.X.shape[0], dtype=int))
        else:
            write_truth(args.truth, d.truth)
    if args.features and d.true_features is not None:
        write_truth(args.features, d.true_features.astype(int))
    print(f"n\t{d.X.shape[0]}\np\t{d.X.shape[1]}\ntrue_k\t{d.true_k}")


def cmd_benchmark(args):
    designs = args.design.split(",")
    methods = args.methods.split(",")
    for m in methods:
        if m not in ALL_METHODS:
            raise UsageError(f"unknown method {m!r}; choose from {ALL_METHODS}")
    for d in designs:
        if d not in DESIGNS:
            raise UsageError(f"unknown design {d!r}; choose from {DESIGNS}")

    def progress(design, method, r, k):
        if args.verbose:
            print(f"{design}\t{method}\treplicate {r}\tk_hat={k}", file=sys.stderr)

    rows = run_benchmark(designs, methods, args.replicates, args.seed, args.B,
                         _parse_params(args.params), args.k_min, args.k_max, args.grid_m,
                         args.threads, progress)
    write_tsv(args.out, rows, BENCH_COLUMNS)
    for r in rows:
        print(f"{r['method']}\t{r['design']}\tfrac_correct_k={r['frac_correct_k']:.3f}\t"
              f"rmse_k={r['rmse_k']:.3f}")


def cmd_indices(args):
    data = load_csv(args.input, args.header)
    X = data.X
    _check_range(args.k_min, args.k_max, X.shape[0])
    rows = []
    for method in args.methods.split(","):
        if method not in INDEX_METHODS:
            raise UsageError(f"unknown index {method!r}; choose from {INDEX_METHODS}")
        kwargs = {"seed": args.seed, "restarts": args.restarts}
        if method.startswith("gap"):
            kwargs.update(B=args.B, threads=args.threads)
        curve = select(method, X, args.k_min, args.k_max, **kwargs)
        for k, s in zip(curve.k_values, curve.scores):
            rows.append({"method": method, "k": k, "score": s, "chosen": int(k == curve.chosen_k)})
        print(f"{method}\tk_hat={curve.chosen_k}")
    if args.out:
        write_tsv(args.out, rows, ["method", "k", "score", "chosen"])


def _common(p, k_min, k_max):
    p.add_argument("--k-min", type=int, default=k_min)
    p.add_argument("--k-max", type=int, default=k_max)
    p.add_argument("--B", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--threads", type=int, default=1, help="0 = one per CPU")


def build_parser():
    ap = argparse.ArgumentParser(prog="sparseclust", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate-k", help="estimate K for plain K-means")
    p.add_argument("--input", required=True)
    p.add_argument("--header", action="store_true")
    p.add_argument("--method", default="s4", choices=PLAIN_METHODS)
    _common(p, 1, 10)
    p.add_argument("--f", type=float, default=0.7)
    p.add_argument("--rho", type=float, default=5.0)
    p.add_argument("--s0", type=float, default=0.8)
    p.add_argument("--n-splits", type=int, default=5)
    p.add_argument("--out")
    p.set_defaults(func=cmd_estimate_k)

    p = sub.add_parser("sparse-estimate", help="estimate (K, lambda) for sparse K-means")
    p.add_argument("--input", required=True)
    p.add_argument("--header", action="store_true")
    p.add_argument("--method", default="s4", choices=sorted(SPARSE_METHODS))
    _common(p, 2, 7)
    p.add_argument("--f", type=float, default=0.7)
    p.add_argument("--rho", type=float, default=5.0)
    p.add_argument("--n-splits", type=int, default=5)
    p.add_argument("--grid-m", type=int, default=28)
    p.add_argument("--lambda0", type=float, default=1.2)
    p.add_argument("--out")
    p.add_argument("--table")
    p.set_defaults(func=cmd_sparse_estimate)

    p = sub.add_parser("simulate", help="write a simulated dataset")
    p.add_argument("--design", required=True, choices=DESIGNS)
    p.add_argument("--params", default="")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--truth")
    p.add_argument("--features", help="write the informative-feature indicator here")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("benchmark", help="replicated runs over simulated designs")
    p.add_argument("--design", required=True, help="comma-separated design ids")
    p.add_argument("--methods", required=True, help="comma-separated method names")
    p.add_argument("--replicates", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--B", type=int, default=50)
    p.add_argument("--k-min", type=int)
    p.add_argument("--k-max", type=int)
    p.add_argument("--grid-m", type=int, default=28)
    p.add_argument("--params", default="")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--verbose", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("indices", help="score curves of the classical indices")
    p.add_argument("--input", required=True)
    p.add_argument("--header", action="store_true")
    p.add_argument("--methods", default=",".join(INDEX_METHODS))
    _common(p, 1, 10)
    p.add_argument("--out")
    p.set_defaults(func=cmd_indices)
    return ap


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except DegenerateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point of the benchmark harness.

Examples
--------
Compare subsample and count sketches with heuristic momentum::

    sketchsolve --problem sparse --n 2000 --d 500 --density 0.25 \\
        --sketch subsample --sketch count --momentum heuristic --reps 5 --out runs/

Acceleration grid::

    sketchsolve accel-grid --n 200 --d 200 --mu-grid 0.01,0.1,1 --nu-grid 1,10,100
"""

import argparse
import sys

from .bench import (
    BENCH_ROUTES,
    EXIT_CONFIG,
    MOMENTUM_NAMES,
    PROBLEM_KINDS,
    SOLVERS,
    TAU_RULES,
    BenchConfig,
    grid_search_accel,
    run_benchmark,
)
from .errors import SketchSolveError
from .sketches import SKETCH_KINDS


def _float_list(text):
    try:
        values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty grid")
    return values


def _common_parser():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--problem", choices=PROBLEM_KINDS, default="dense")
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--d", type=int, default=50)
    p.add_argument("--density", type=float, default=0.25)
    p.add_argument("--csv", dest="csv_path")
    p.add_argument("--route", choices=BENCH_ROUTES, default="auto")
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--lambda", dest="lam", type=float, default=None, help="ridge parameter (default 1/n)")
    p.add_argument("--sketch", dest="sketches", action="append", choices=SKETCH_KINDS)
    tau = p.add_mutually_exclusive_group()
    tau.add_argument("--tau", type=int)
    tau.add_argument("--tau-rule", choices=TAU_RULES, default=None, help="default m4")
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--max-iter", type=int, default=10000)
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="bench_out")
    return p


def build_parser():
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="sketchsolve",
        parents=[common],
        description="Benchmark sketch-and-project ridge solvers.",
        epilog="Run 'sketchsolve accel-grid --help' for the acceleration grid search.",
    )
    parser.add_argument("--solver", dest="solvers", action="append", choices=SOLVERS)
    parser.add_argument("--momentum", dest="schedules", action="append", choices=tuple(MOMENTUM_NAMES))
    return parser


def build_grid_parser():
    parser = argparse.ArgumentParser(
        prog="sketchsolve accel-grid",
        parents=[_common_parser()],
        description="Grid search over the acceleration parameters (mu, nu).",
    )
    parser.add_argument("--mu-grid", type=_float_list, required=True)
    parser.add_argument("--nu-grid", type=_float_list, required=True)
    return parser


def _config(args):
    return BenchConfig(
        problem=args.problem,
        n=args.n,
        d=args.d,
        density=args.density,
        csv_path=args.csv_path,
        route=args.route,
        sigma=args.sigma,
        lam=args.lam,
        solvers=tuple(getattr(args, "solvers", None) or ("sketch",)),
        sketches=tuple(args.sketches or ("subsample",)),
        schedules=tuple(getattr(args, "schedules", None) or ("none",)),
        tau=args.tau,
        tau_rule=args.tau_rule or "m4",
        tol=args.tol,
        max_iter=args.max_iter,
        reps=args.reps,
        seed=args.seed,
        out=args.out,
    )


def main(argv=None):
    """Run the CLI; returns the process exit code."""
    argv = list(sys.argv[1:] if argv is None else argv)
    grid = bool(argv) and argv[0] == "accel-grid"
    parser = build_grid_parser() if grid else build_parser()
    try:
        args = parser.parse_args(argv[1:] if grid else argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_CONFIG
    try:
        config = _config(args)
        if grid:
            code = grid_search_accel(config, args.mu_grid, args.nu_grid)
        else:
            code = run_benchmark(config)
    except (SketchSolveError, OSError) as exc:
        print(f"sketchsolve: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return code


if __name__ == "__main__":
    sys.exit(main())

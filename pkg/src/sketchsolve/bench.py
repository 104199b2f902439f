"""Benchmark harness: problem generation, solver matrix, traces and summaries.

Outputs written to ``config.out``:

``trace_{solver}_{sketch}_{schedule}_rep{r:03d}.csv``
    one file per combination and repetition, header
    ``run,solver,sketch,schedule,iter,rel_residual,seconds``.
``summary.json``
    per-combination quartiles of iterations and wall time, converged flags,
    setup time and, for ``m <= 200``, rate certificates.
``accel_grid.csv``
    written by :func:`grid_search_accel`.

Everything except the ``seconds`` column and the ``metadata`` block of the
summary is a deterministic function of the configuration.
"""

import csv
import json
import math
import platform
import time
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import NamedTuple, Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import DivergenceError, InputError, ParseError
from .problem import auto_select, build_dual, build_kernel, build_primal
from .schedules import MomentumSchedule
from .sketches import SKETCH_KINDS, SketchConfig
from .solvers import (
    AccelParams,
    SolveReport,
    SolverConfig,
    solve_accelerated,
    solve_cg,
    solve_direct,
    solve_momentum,
    solve_sketch_project,
)
from . import theory

PROBLEM_KINDS = ("dense", "sparse", "csv")
BENCH_ROUTES = ("auto", "primal", "dual", "kernel")
SOLVERS = ("sketch", "cg", "direct")
MOMENTUM_NAMES = {
    "none": "none",
    "constant": "constant",
    "increasing": "theoretical_increasing",
    "heuristic": "heuristic",
}
TAU_RULES = ("m4", "m23")
TRACE_HEADER = ("run", "solver", "sketch", "schedule", "iter", "rel_residual", "seconds")
GRID_HEADER = ("mu", "nu", "status", "mean_seconds", "converged_fraction", "mean_iterations")
CERTIFICATE_MAX_DIM = 200

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ALL_DIVERGED = 3


@dataclass(frozen=True)
class BenchConfig:
    """Everything needed to reproduce one benchmark run."""

    problem: str = "dense"
    n: int = 200
    d: int = 50
    density: float = 0.25
    csv_path: Optional[str] = None
    route: str = "auto"
    sigma: float = 1.0
    lam: Optional[float] = None
    solvers: Sequence[str] = ("sketch",)
    sketches: Sequence[str] = ("subsample",)
    schedules: Sequence[str] = ("none",)
    tau: Optional[int] = None
    tau_rule: str = "m4"
    tol: float = 1e-4
    max_iter: int = 10000
    reps: int = 1
    seed: int = 0
    out: str = "bench_out"

    def __post_init__(self):
        if self.problem not in PROBLEM_KINDS:
            raise InputError(f"unknown problem source {self.problem!r}")
        if self.problem == "csv" and not self.csv_path:
            raise InputError("problem source csv needs a path")
        if self.problem != "csv" and (self.n < 1 or self.d < 1):
            raise InputError("n and d must be positive")
        if not 0.0 < self.density <= 1.0:
            raise InputError(f"density must lie in (0, 1], got {self.density}")
        if self.route not in BENCH_ROUTES:
            raise InputError(f"unknown route {self.route!r}")
        if self.route == "kernel" and not self.sigma > 0:
            raise InputError("sigma must be positive")
        if self.lam is not None and not self.lam >= 0:
            raise InputError("lambda must be non-negative")
        for s in self.solvers:
            if s not in SOLVERS:
                raise InputError(f"unknown solver {s!r}")
        for s in self.sketches:
            if s not in SKETCH_KINDS:
                raise InputError(f"unknown sketch {s!r}")
        for s in self.schedules:
            if s not in MOMENTUM_NAMES:
                raise InputError(f"unknown momentum schedule {s!r}")
        if not self.solvers:
            raise InputError("at least one solver is required")
        if self.tau is not None and self.tau < 1:
            raise InputError("tau must be positive")
        if self.tau_rule not in TAU_RULES:
            raise InputError(f"unknown tau rule {self.tau_rule!r}")
        if not self.tol > 0:
            raise InputError("tolerance must be positive")
        if self.max_iter < 1:
            raise InputError("max_iter must be positive")
        if self.reps < 1:
            raise InputError("repetitions must be >= 1")


class TraceRecord(NamedTuple):
    run: int
    solver: str
    sketch: str
    schedule: str
    iter: int
    rel_residual: float
    seconds: float


def _rng(seed):
    return np.random.Generator(np.random.Philox(seed))


def generate_synthetic(kind, n, d, density=1.0, seed=0):
    """Random regression data ``y = X w + 0.01 noise``.

    ``kind='dense'`` draws i.i.d. standard normal entries. ``kind='sparse'``
    keeps each entry with probability ``density`` (standard normal values) and
    returns CSR. ``w`` is standard normal.
    """
    if kind not in ("dense", "sparse"):
        raise InputError(f"unknown synthetic kind {kind!r}")
    if n < 1 or d < 1:
        raise InputError("n and d must be positive")
    if not 0.0 < density <= 1.0:
        raise InputError(f"density must lie in (0, 1], got {density}")
    rng = _rng(seed)
    if kind == "dense":
        X = rng.standard_normal((n, d))
    else:
        mask = rng.random((n, d)) < density
        rows, cols = np.nonzero(mask)
        vals = rng.standard_normal(rows.size)
        X = sp.csr_matrix((vals, (rows, cols)), shape=(n, d))
    w = rng.standard_normal(d)
    y = np.asarray(X @ w).ravel() + 0.01 * rng.standard_normal(n)
    return X, y


def _is_number(cell):
    try:
        float(cell)
    except ValueError:
        return False
    return True


def load_csv(path):
    """Load a numeric CSV; the last column is the target.

    A first row with any non-numeric cell is treated as a header. Blank lines
    are ignored.

    Raises
    ------
    ParseError
        On an empty file, ragged rows, non-numeric or non-finite cells.
    """
    rows = []
    width = None
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            cells = [c.strip() for c in row]
            if not cells or all(c == "" for c in cells):
                continue
            if width is None and not rows and not all(_is_number(c) for c in cells):
                width = len(cells)
                continue
            if width is None:
                width = len(cells)
            if len(cells) != width:
                raise ParseError(f"expected {width} columns, found {len(cells)}", line=lineno)
            try:
                values = [float(c) for c in cells]
            except ValueError:
                bad = next(c for c in cells if not _is_number(c))
                raise ParseError(f"non-numeric cell {bad!r}", line=lineno) from None
            if not all(math.isfinite(v) for v in values):
                raise ParseError("non-finite cell", line=lineno)
            rows.append(values)
    if not rows:
        raise ParseError("no data rows")
    if width < 2:
        raise ParseError("need at least one feature column and one target column")
    data = np.array(rows)
    return data[:, :-1], data[:, -1].copy()


def write_traces(path, records):
    """Write trace records as CSV (floats in shortest round-trip form)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_HEADER)
        for r in records:
            writer.writerow(
                [r.run, r.solver, r.sketch, r.schedule, r.iter, repr(float(r.rel_residual)), repr(float(r.seconds))]
            )


def read_traces(path):
    """Parse a trace CSV written by :func:`write_traces`."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != TRACE_HEADER:
            raise ParseError(f"bad trace header {header!r}", line=1)
        out = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(TRACE_HEADER):
                raise ParseError(f"expected {len(TRACE_HEADER)} columns", line=lineno)
            try:
                out.append(
                    TraceRecord(int(row[0]), row[1], row[2], row[3], int(row[4]), float(row[5]), float(row[6]))
                )
            except ValueError as exc:
                raise ParseError(str(exc), line=lineno) from None
    return out


def resolve_tau(m, tau=None, rule="m4"):
    """Sketch size: an absolute ``tau`` or ``floor(m/4)`` / ``ceil(m^(2/3))``, clipped to ``[1, m]``."""
    if tau is not None:
        value = int(tau)
    elif rule == "m4":
        value = m // 4
    elif rule == "m23":
        value = math.ceil(m ** (2.0 / 3.0) - 1e-9)
    else:
        raise InputError(f"unknown tau rule {rule!r}")
    if tau is not None and not 1 <= value <= m:
        raise InputError(f"tau = {value} outside [1, {m}]")
    return min(max(value, 1), m)


def build_problem(config):
    """Load or generate data and assemble the system for ``config.route``."""
    if config.problem == "csv":
        X, y = load_csv(config.csv_path)
    else:
        X, y = generate_synthetic(config.problem, config.n, config.d, config.density, config.seed)
    n = X.shape[0]
    lam = 1.0 / n if config.lam is None else config.lam
    if config.route == "kernel":
        return build_kernel(X, y, lam, config.sigma)
    if config.route == "primal":
        return build_primal(X, y, lam)
    if config.route == "dual":
        return build_dual(X, y, lam)
    return auto_select(X, y, lam)


def _run_seed(seed, rep):
    return int(np.random.SeedSequence([seed, rep]).generate_state(1)[0])


def _direct_report(problem):
    start = time.perf_counter()
    w = solve_direct(problem)
    elapsed = time.perf_counter() - start
    rel = float(np.linalg.norm(problem.A @ w - problem.b) / max(np.linalg.norm(problem.b), np.finfo(float).tiny))
    return SolveReport(
        iterations=1,
        converged=True,
        residual_trace=np.array([1.0, rel]),
        wall_times=np.array([0.0, elapsed]),
        solution=w,
        method="direct",
    )


def _combinations(config):
    for solver in config.solvers:
        if solver == "sketch":
            for sketch in config.sketches:
                for schedule in config.schedules:
                    yield solver, sketch, schedule
        else:
            yield solver, "-", "-"


def _run_once(problem, config, combo, tau, seed):
    solver, sketch, schedule = combo
    if solver == "direct":
        return _direct_report(problem)
    scfg = SolverConfig(
        tol=config.tol,
        max_iter=config.max_iter,
        sketch=SketchConfig(sketch if solver == "sketch" else "subsample", tau),
        seed=seed,
    )
    if solver == "cg":
        return solve_cg(problem, scfg)
    if schedule == "none":
        return solve_sketch_project(problem, scfg)
    return solve_momentum(problem, scfg, MomentumSchedule(MOMENTUM_NAMES[schedule]))


def _quartiles(values):
    arr = np.asarray(values, dtype=np.float64)
    q1, med, q3 = np.percentile(arr, [25, 50, 75], method="linear")
    return {"median": float(med), "q1": float(q1), "q3": float(q3)}


def _finite_or_none(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def _certificates(problem, tau, config):
    if problem.m > CERTIFICATE_MAX_DIM:
        return None
    out = {}
    A = problem.A
    try:
        cert = theory.certify(A, theory.DiscreteSketchEnsemble.coordinate(A), label="coordinate")
        out["coordinate"] = {k: (_finite_or_none(v) if k != "ensemble" else v) for k, v in cert.as_dict().items()}
        ens = theory.sketch_ensemble(SketchConfig("subsample", tau), A)
        if ens is not None and "subsample" in config.sketches:
            cert = theory.certify(A, ens, label=f"subsample-{tau}")
            out["subsample"] = {k: (_finite_or_none(v) if k != "ensemble" else v) for k, v in cert.as_dict().items()}
    except (InputError, np.linalg.LinAlgError) as exc:
        out["error"] = str(exc)
    return out


def trace_filename(solver, sketch, schedule, rep):
    return f"trace_{solver}_{sketch}_{schedule}_rep{rep:03d}.csv"


def run_benchmark(config):
    """Run the solver x sketch x schedule matrix and write traces and a summary.

    Returns
    -------
    int
        0 on completion, 3 if every run of some combination diverged.
    """
    started = datetime.now(timezone.utc).isoformat()
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    problem = build_problem(config)
    setup_seconds = time.perf_counter() - t0
    m = problem.m
    tau = resolve_tau(m, config.tau, config.tau_rule)

    combos = []
    exit_code = EXIT_OK
    for combo in _combinations(config):
        runs = []
        files = []
        for rep in range(config.reps):
            seed = _run_seed(config.seed, rep)
            diverged = False
            try:
                report = _run_once(problem, config, combo, tau, seed)
            except DivergenceError as exc:
                report = exc.report
                diverged = True
            name = trace_filename(*combo, rep)
            records = [
                TraceRecord(rep, *combo, k, float(rel), float(sec))
                for k, (rel, sec) in enumerate(zip(report.residual_trace, report.wall_times))
            ]
            write_traces(out / name, records)
            files.append(name)
            runs.append(
                {
                    "rep": rep,
                    "seed": seed,
                    "iterations": int(report.iterations),
                    "converged": bool(report.converged),
                    "diverged": diverged,
                    "final_rel_residual": _finite_or_none(report.residual_trace[-1]),
                    "seconds": float(report.wall_times[-1]),
                }
            )
        all_diverged = all(r["diverged"] for r in runs)
        if all_diverged:
            exit_code = EXIT_ALL_DIVERGED
        solver, sketch, schedule = combo
        combos.append(
            {
                "solver": solver,
                "sketch": sketch,
                "schedule": schedule,
                "tau": tau if solver == "sketch" else None,
                "iterations": _quartiles([r["iterations"] for r in runs]),
                "seconds": _quartiles([r["seconds"] for r in runs]),
                "converged": [r["converged"] for r in runs],
                "all_diverged": all_diverged,
                "runs": runs,
                "trace_files": files,
            }
        )

    summary = {
        "config": {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(config).items()},
        "problem": {
            "route": problem.route,
            "m": m,
            "lambda": problem.lam,
            "tau": tau,
            "setup_seconds": setup_seconds,
        },
        "certificates": _certificates(problem, tau, config),
        "combinations": combos,
        "metadata": {
            "started": started,
            "finished": datetime.now(timezone.utc).isoformat(),
            "python": platform.python_version(),
            "numpy": np.__version__,
        },
    }
    with open(out / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, allow_nan=False)
    return exit_code


def grid_search_accel(config, mu_grid, nu_grid):
    """Time the accelerated solver over a ``(mu, nu)`` grid.

    Every pair gets one row in ``accel_grid.csv``: pairs violating
    ``0 < mu <= 1/nu <= 1`` are marked ``infeasible``; feasible pairs run
    ``config.reps`` times with the first configured sketch and are marked
    ``ok`` if every run reached the tolerance, ``diverged`` if some run hit
    the divergence guard and ``timeout`` otherwise.
    """
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    problem = build_problem(config)
    tau = resolve_tau(problem.m, config.tau, config.tau_rule)
    sketch = SketchConfig(config.sketches[0], tau)
    rows = []
    for mu in mu_grid:
        for nu in nu_grid:
            try:
                params = AccelParams(float(mu), float(nu))
            except InputError:
                params = None
            if params is None or not params.is_feasible:
                rows.append([repr(float(mu)), repr(float(nu)), "infeasible", "", "", ""])
                continue
            seconds, iters, hits, blowups = [], [], 0, 0
            for rep in range(config.reps):
                scfg = SolverConfig(
                    tol=config.tol, max_iter=config.max_iter, sketch=sketch, seed=_run_seed(config.seed, rep)
                )
                try:
                    report = solve_accelerated(problem, scfg, params)
                except DivergenceError as exc:
                    report = exc.report
                    blowups += 1
                seconds.append(float(report.wall_times[-1]))
                iters.append(report.iterations)
                hits += bool(report.converged)
            if hits == config.reps:
                status = "ok"
            else:
                status = "diverged" if blowups else "timeout"
            rows.append(
                [
                    repr(float(mu)),
                    repr(float(nu)),
                    status,
                    repr(float(np.mean(seconds))),
                    repr(hits / config.reps),
                    repr(float(np.mean(iters))),
                ]
            )
    with open(out / "accel_grid.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(GRID_HEADER)
        writer.writerows(rows)
    return EXIT_OK

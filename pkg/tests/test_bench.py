import csv
import json

import numpy as np
import pytest
import scipy.sparse as sp

from sketchsolve import solvers
from sketchsolve.bench import (
    GRID_HEADER,
    TRACE_HEADER,
    BenchConfig,
    TraceRecord,
    generate_synthetic,
    grid_search_accel,
    load_csv,
    read_traces,
    resolve_tau,
    run_benchmark,
    write_traces,
)
from sketchsolve.errors import InputError, ParseError


def test_synthetic_dense_and_sparse():
    X, y = generate_synthetic("dense", 30, 7, seed=1)
    assert X.shape == (30, 7) and y.shape == (30,)
    Xs, ys = generate_synthetic("sparse", 30, 7, density=1.0, seed=1)
    assert sp.issparse(Xs) and Xs.nnz == 30 * 7
    assert np.all(np.isfinite(Xs.data)) and np.all(np.isfinite(ys))


def test_synthetic_density():
    X, _ = generate_synthetic("sparse", 2000, 500, density=0.25, seed=0)
    assert abs(X.nnz - 0.25 * 2000 * 500) <= 0.02 * 0.25 * 2000 * 500


def test_synthetic_deterministic():
    a = generate_synthetic("sparse", 50, 20, 0.3, seed=5)
    b = generate_synthetic("sparse", 50, 20, 0.3, seed=5)
    assert (a[0] != b[0]).nnz == 0
    np.testing.assert_array_equal(a[1], b[1])
    with pytest.raises(InputError):
        generate_synthetic("sparse", 5, 5, 0.0)


def test_load_csv(tmp_path):
    f = tmp_path / "a.csv"
    f.write_text("1,2,3\n4,5,6")
    X, y = load_csv(f)
    np.testing.assert_array_equal(X, [[1, 2], [4, 5]])
    np.testing.assert_array_equal(y, [3, 6])
    f.write_text("a,b,t\n1,2,3\n4,5,6\n")
    X, y = load_csv(f)
    assert X.shape == (2, 2)


@pytest.mark.parametrize(
    "text,line",
    [("", None), ("1,2,3\n4,5\n", 2), ("1,2,3\n4,x,6\n", 2), ("a,b,c\n1,2,3\n4,5,6,7\n", 3), ("1,2\n3,nan\n", 2)],
)
def test_load_csv_errors(tmp_path, text, line):
    f = tmp_path / "bad.csv"
    f.write_text(text)
    with pytest.raises(ParseError) as exc:
        load_csv(f)
    assert exc.value.line == line


def test_trace_roundtrip(tmp_path):
    recs = [
        TraceRecord(0, "sketch", "count", "heuristic", 0, 1.0, 0.0),
        TraceRecord(0, "sketch", "count", "heuristic", 1, 0.1 + 0.2, 1e-7 / 3),
        TraceRecord(3, "cg", "-", "-", 2, 5e-324, 12.5),
    ]
    path = tmp_path / "t.csv"
    write_traces(path, recs)
    assert read_traces(path) == recs
    (tmp_path / "bad.csv").write_text("x,y\n")
    with pytest.raises(ParseError):
        read_traces(tmp_path / "bad.csv")


def test_resolve_tau():
    assert resolve_tau(100, rule="m4") == 25
    assert resolve_tau(500, rule="m23") == 63
    assert resolve_tau(512, rule="m23") == 64
    assert resolve_tau(3, rule="m4") == 1
    assert resolve_tau(10, tau=4) == 4
    with pytest.raises(InputError):
        resolve_tau(10, tau=11)


def test_config_validation():
    with pytest.raises(InputError):
        BenchConfig(density=0.0)
    with pytest.raises(InputError):
        BenchConfig(reps=0)
    with pytest.raises(InputError):
        BenchConfig(solvers=("magic",))
    with pytest.raises(InputError):
        BenchConfig(problem="csv")


def _summary(out):
    return json.loads((out / "summary.json").read_text())


def test_direct_only(tmp_path):
    cfg = BenchConfig(n=60, d=20, solvers=("direct",), out=str(tmp_path))
    assert run_benchmark(cfg) == 0
    s = _summary(tmp_path)
    assert len(s["combinations"]) == 1
    assert s["combinations"][0]["runs"][0]["final_rel_residual"] <= 1e-10


def test_sparse_smoke_subsample_vs_count(tmp_path):
    cfg = BenchConfig(problem="sparse", n=300, d=60, density=0.25, sketches=("subsample", "count"),
                      schedules=("none", "heuristic"), tol=1e-4, max_iter=20000, out=str(tmp_path))
    assert run_benchmark(cfg) == 0
    s = _summary(tmp_path)
    assert len(s["combinations"]) == 4
    for c in s["combinations"]:
        assert all(c["converged"])
        for name in c["trace_files"]:
            recs = read_traces(tmp_path / name)
            assert recs[0].iter == 0 and recs[0].rel_residual == 1.0
            assert recs[-1].rel_residual <= 1e-4
    assert s["certificates"]["coordinate"]["rho"] > 0


def test_reps_quartiles_and_files(tmp_path):
    cfg = BenchConfig(n=80, d=30, reps=10, solvers=("sketch", "cg"), out=str(tmp_path))
    assert run_benchmark(cfg) == 0
    s = _summary(tmp_path)
    for c in s["combinations"]:
        assert len(c["trace_files"]) == 10
        assert set(c["iterations"]) == {"median", "q1", "q3"}
        assert c["iterations"]["q1"] <= c["iterations"]["median"] <= c["iterations"]["q3"] <= cfg.max_iter
        assert c["seconds"]["median"] >= 0
    assert len(list(tmp_path.glob("trace_sketch_subsample_none_rep*.csv"))) == 10


def test_kernel_route_summary(tmp_path):
    cfg = BenchConfig(problem="dense", n=40, d=5, route="kernel", sigma=1.0, tau=4, out=str(tmp_path))
    assert run_benchmark(cfg) == 0
    s = _summary(tmp_path)
    assert s["problem"]["route"] == "kernel" and s["problem"]["m"] == 40
    assert s["problem"]["setup_seconds"] >= 0


def test_all_diverged_exit_code(tmp_path, monkeypatch):
    monkeypatch.setattr(solvers, "DIVERGENCE_THRESHOLD", 1e-6)
    cfg = BenchConfig(n=40, d=10, reps=2, schedules=("constant",), tau=1, out=str(tmp_path))
    assert run_benchmark(cfg) == 3
    s = _summary(tmp_path)
    assert s["combinations"][0]["all_diverged"]


def test_grid_search(tmp_path):
    cfg = BenchConfig(n=200, d=200, route="primal", tau=20, tol=1e-3, max_iter=3000, out=str(tmp_path))
    code = grid_search_accel(cfg, [0.01, 0.5, 1.0], [1.0, 2.0, 200.0])
    assert code == 0
    with open(tmp_path / "accel_grid.csv") as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == GRID_HEADER
    assert len(rows) == 10
    status = {(float(r[0]), float(r[1])): r[2] for r in rows[1:]}
    assert status[(1.0, 2.0)] == "infeasible"
    assert status[(0.5, 200.0)] == "infeasible"
    assert status[(1.0, 1.0)] in ("ok", "timeout", "diverged")
    assert status[(0.01, 1.0)] in ("ok", "timeout", "diverged")


def test_csv_problem(tmp_path):
    rng = np.random.default_rng(0)
    data = np.column_stack([rng.standard_normal((30, 4)), rng.standard_normal(30)])
    f = tmp_path / "data.csv"
    np.savetxt(f, data, delimiter=",", header="a,b,c,d,y", comments="")
    out = tmp_path / "out"
    cfg = BenchConfig(problem="csv", csv_path=str(f), solvers=("direct", "cg"), out=str(out))
    assert run_benchmark(cfg) == 0
    assert _summary(out)["problem"]["m"] == 4


def test_grid_marks_divergence(tmp_path, monkeypatch):
    monkeypatch.setattr(solvers, "DIVERGENCE_THRESHOLD", 1e-6)
    cfg = BenchConfig(n=40, d=10, tau=2, out=str(tmp_path))
    grid_search_accel(cfg, [0.5], [1.0])
    rows = (tmp_path / "accel_grid.csv").read_text().splitlines()
    assert rows[1].split(",")[2] == "diverged"

import json
import subprocess
import sys

from sketchsolve.cli import main


def test_cli_runs(tmp_path):
    code = main(["--problem", "sparse", "--n", "120", "--d", "30", "--sketch", "subsample", "--sketch", "srht",
                 "--momentum", "none", "--momentum", "increasing", "--tau-rule", "m23", "--reps", "2",
                 "--out", str(tmp_path)])
    assert code == 0
    s = json.loads((tmp_path / "summary.json").read_text())
    assert {(c["sketch"], c["schedule"]) for c in s["combinations"]} == {
        ("subsample", "none"), ("subsample", "increasing"), ("srht", "none"), ("srht", "increasing")}
    assert s["problem"]["tau"] == 10


def test_cli_config_errors(tmp_path, capsys):
    assert main(["--sketch", "fourier"]) == 2
    assert main(["--density", "0", "--out", str(tmp_path)]) == 2
    assert main(["--problem", "csv", "--csv", str(tmp_path / "missing.csv"), "--out", str(tmp_path)]) == 2
    assert main(["--tau", "3", "--tau-rule", "m4"]) == 2
    (tmp_path / "bad.csv").write_text("1,2\n3\n")
    assert main(["--problem", "csv", "--csv", str(tmp_path / "bad.csv"), "--out", str(tmp_path)]) == 2
    assert "line 2" in capsys.readouterr().err


def test_cli_accel_grid(tmp_path):
    code = main(["accel-grid", "--n", "60", "--d", "20", "--tau", "5", "--mu-grid", "0.1,1", "--nu-grid", "1,5",
                 "--max-iter", "500", "--out", str(tmp_path)])
    assert code == 0
    lines = (tmp_path / "accel_grid.csv").read_text().splitlines()
    assert len(lines) == 5
    assert main(["accel-grid", "--mu-grid", "a,b", "--nu-grid", "1"]) == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "sketchsolve", "--solver", "direct", "--n", "20", "--d", "5",
                           "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "summary.json").exists()

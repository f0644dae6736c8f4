import csv
import io
import json
import subprocess
import sys

import pytest

from curvata import cli
from curvata.errors import NumericalFailure


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_symcheck_newton_row(capsys):
    code, out, _ = run(capsys, "symcheck", "--kappa", "1,2,3", "--r", "1")
    assert code == 0
    assert "newton: 5,4,3; trP1: 12; trP1A: 22; trP1A2: 48" in out
    assert "positivity: PositiveDefinite" in out


def test_symcheck_umbilic_and_indefinite(capsys):
    code, out, _ = run(capsys, "symcheck", "--kappa", "2,2", "--r", "0")
    assert code == 0
    line = next(l for l in out.splitlines() if l.startswith("maclaurin:"))
    margins = [float(part.split("=")[1]) for part in line.split(": ", 1)[1].split("; ")]
    assert margins and all(m == 0.0 for m in margins)
    code, out, _ = run(capsys, "symcheck", "--kappa", "1,-1", "--r", "1")
    assert code == 0
    assert "positivity: Indefinite" in out
    assert "maclaurin: not applicable" in out


@pytest.mark.parametrize("argv", [
    ["symcheck", "--kappa", "1,x"],
    ["symcheck", "--kappa", "1,2", "--r", "5"],
    ["symcheck"],
    ["tube", "--n", "3", "--r", "0", "--R", "-1", "--l", "2"],
    ["tube", "--n", "3", "--r", "0", "--R", "1", "--l", "two"],
    ["cap", "--n", "3", "--c", "1", "--rho0", "4"],
    ["verify", "--only", "11"],
    ["nonsense"],
])
def test_invalid_input_exit_code(capsys, argv):
    try:
        code = cli.main(argv)
    except SystemExit as exc:
        code = exc.code
    capsys.readouterr()
    assert code == cli.EXIT_INVALID


def test_numerical_failure_exit_code(capsys, monkeypatch):
    def boom(*a, **k):
        raise NumericalFailure("stub", {})
    monkeypatch.setattr(cli, "tube_verdict", boom)
    code, _, err = run(capsys, "tube", "--n", "3", "--r", "0", "--R", "1", "--l", "2")
    assert code == cli.EXIT_NUMERICAL
    assert "numerical failure" in err


def test_tube_examples(capsys):
    code, out, _ = run(capsys, "tube", "--n", "3", "--r", "0", "--c", "0", "--R", "1", "--l", "2")
    assert code == 0
    assert out.startswith("Stable margin=0.3132")
    code, out, _ = run(capsys, "tube", "--n", "3", "--r", "1", "--c", "0", "--R", "1",
                       "--l", "3.14159265")
    first = out.splitlines()[0]
    assert first.startswith("Stable margin=0.0000")
    code, out, _ = run(capsys, "tube", "--n", "3", "--r", "0", "--c", "-1", "--R", "0.5",
                       "--l", "4")
    assert "sinh" in out
    assert out.startswith("Unstable")


def test_tube_mode_table(capsys):
    code, out, _ = run(capsys, "tube", "--n", "3", "--r", "1", "--R", "1", "--l", "2",
                       "--modes", "2", "1")
    assert code == 0
    table = out[out.index("j,m,eigenvalue"):]
    rows = list(csv.DictReader(io.StringIO(table)))
    assert len(rows) == 6
    assert float(rows[0]["eigenvalue"]) == pytest.approx(-2.0)


def test_cap_report_and_csv(capsys, tmp_path):
    path = tmp_path / "spec.csv"
    code, out, _ = run(capsys, "cap", "--n", "3", "--c", "0", "--rho0", "1", "--N", "512",
                       "--csv", str(path))
    assert code == 0
    assert "index Full: 1" in out
    assert "index MeanZero: 0" in out
    assert "verdict: Stable (case iv)" in out
    rows = list(csv.DictReader(path.open()))
    assert list(rows[0]) == ["l", "k", "eigenvalue", "multiplicity"]
    assert {int(r["l"]) for r in rows} == {0, 1, 2, 3}


def _sweep(tmp_path, config, capsys, env_threads=None, monkeypatch=None):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(config))
    if monkeypatch is not None:
        if env_threads is None:
            monkeypatch.delenv("CURVATA_THREADS", raising=False)
        else:
            monkeypatch.setenv("CURVATA_THREADS", str(env_threads))
    code, out, err = run(capsys, "sweep", str(cfg))
    return code, out


def test_sweep_is_deterministic(capsys, tmp_path, monkeypatch):
    config = {"command": "tube", "n": 3, "r": 0, "c": -0.5, "R": [0.2, 2.0, 7],
              "l": [0.5, 5.0, 6]}
    code1, out1 = _sweep(tmp_path, config, capsys, None, monkeypatch)
    code2, out2 = _sweep(tmp_path, config, capsys, 1, monkeypatch)
    assert code1 == code2 == 0
    assert out1 == out2
    rows = list(csv.DictReader(io.StringIO(out1)))
    assert list(rows[0]) == cli.TUBE_COLUMNS
    assert len(rows) == 42
    # row-major over the axes in file order
    assert [float(r["R"]) for r in rows[:6]] == [0.2] * 6


def test_sweep_cap_rows(capsys, tmp_path, monkeypatch):
    out_path = tmp_path / "caps.csv"
    config = {"command": "cap", "n": 3, "c": [-1.0, 0.0, 2], "rho0": 0.8, "N": 256,
              "output": str(out_path)}
    code, _ = _sweep(tmp_path, config, capsys, 2, monkeypatch)
    assert code == 0
    rows = list(csv.DictReader(out_path.open()))
    assert list(rows[0]) == cli.CAP_COLUMNS
    assert [r["index_full"] for r in rows] == ["1", "1"]
    assert [r["index_mean_zero"] for r in rows] == ["0", "0"]


@pytest.mark.parametrize("config", [
    {"command": "tube", "n": 3, "r": 0, "R": 1.0},
    {"command": "tube", "n": 3, "r": 0, "R": 1.0, "l": 1.0, "bogus": 1},
    {"command": "tube", "n": 3, "r": 0, "R": [0.1, 1.0, 0], "l": 1.0},
    {"command": "tube", "n": [2, 3, 3], "r": 0, "R": 1.0, "l": 1.0},
    {"command": "tube", "n": 3, "r": 0, "R": [0.1, 1.0, 2], "l": [1, 2, 2], "c": [0, 1, 2]},
    {"command": "tube", "n": 3, "r": 0, "R": [-1.0, 1.0, 3], "l": 1.0},
    {"command": "cap", "n": 3, "c": 0.0, "rho0": 1.0, "N": 10},
    {"command": "serve"},
])
def test_sweep_rejects_bad_configs(capsys, tmp_path, monkeypatch, config):
    code, out = _sweep(tmp_path, config, capsys, None, monkeypatch)
    assert code == cli.EXIT_INVALID
    assert out == ""


def test_help_documents_columns(capsys):
    for command, columns in (("sweep", cli.TUBE_COLUMNS + cli.CAP_COLUMNS),
                             ("cap", ["multiplicity"]), ("tube", ["eigenvalue"])):
        with pytest.raises(SystemExit) as exc:
            cli.main([command, "--help"])
        assert exc.value.code == 0
        out = capsys.readouterr().out
        for col in columns:
            assert col in out


def test_verify_subset(capsys):
    code, out, _ = run(capsys, "verify", "--only", "4,10")
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("PASS [ 4]")
    assert lines[1].startswith("PASS [10]")
    assert lines[-1] == "2/2 passed"


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "curvata", "symcheck", "--kappa", "1,2,3",
                           "--r", "1"], capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert "newton: 5,4,3" in proc.stdout

from __future__ import annotations

import csv
import io
import json
import subprocess
import sys

import pytest

from smoothxyz import __version__
from smoothxyz.cli import RunConfig, UsageError, main, run


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_count_primitive_prints_seven(capsys):
    code, out, _ = _run(capsys, "count", "--H", "10", "--y", "3", "--primitive")
    assert code == 0 and out.strip() == "7"


def test_psi_prints_eighteen(capsys):
    code, out, _ = _run(capsys, "psi", "--x", "30", "--y", "5")
    assert code == 0 and out.strip() == "18"


@pytest.mark.parametrize("argv", [
    ["psi", "--x", "30", "--y", "5", "--bogus"],
    ["count", "--H", "10"],
    ["nope"],
    ["count", "--H", "10", "--y", "3", "--kappa", "2"],
    ["psi", "-x", "30", "--y", "5"],
])
def test_usage_errors(capsys, argv):
    code, _, err = _run(capsys, *argv)
    assert code == 2 and err


def test_value_error_maps_to_usage(capsys):
    code, _, err = _run(capsys, "weights", "--eps", "0.5")
    assert code == 2 and "error" in err


def test_budget_exit(capsys):
    code, _, err = _run(capsys, "count", "--H", "100000", "--y", "5", "--budget", "1000")
    assert code == 3 and "budget" in err


def test_json_report_echoes_params(capsys):
    code, out, _ = _run(capsys, "count", "--H", "10", "--y", "3", "--report", "json")
    doc = json.loads(out)
    assert code == 0
    assert doc["version"] == __version__ and doc["command"] == "count"
    assert doc["params"]["H"] == 10 and doc["params"]["y"] == 3
    assert doc["result"]["ordered"] == 16 and doc["result"]["unordered"] == 10


def test_csv_output(capsys):
    code, out, _ = _run(capsys, "count", "--H", "10", "--y", "3", "--report", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0 and rows[0] == ["quantity", "value"]
    assert ["ordered", "16"] in rows


def test_deterministic_bytes(tmp_path):
    argv = ["circle", "--x", "300", "--y", "5", "--samples", "8", "--seed", "4"]
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(argv + ["--output", str(a)]) == 0
    assert main(argv + ["--output", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    doc = json.loads(a.read_text())
    assert doc["result"]["passed"] and doc["seed"] == 4


def test_float_precision(capsys):
    code, out, _ = _run(capsys, "singular", "--c", "0.875", "--y", "100", "--format", "csv")
    assert code == 0
    for row in list(csv.reader(io.StringIO(out)))[1:]:
        for cell in row:
            if "e" in cell or "." in cell:
                try:
                    v = float(cell)
                except ValueError:
                    continue
                assert float(f"{v:.15g}") == v


@pytest.mark.parametrize("argv", [
    ["saddle", "--x", "1e6", "--y", "100"],
    ["psi", "--x", "1e5", "--y", "30", "--estimates"],
    ["dirichlet", "--q", "12"],
    ["weights", "--eps", "0.05", "--tmax", "10", "--points", "11"],
    ["report", "--x", "2000", "--y", "50", "--sieve"],
    ["count", "--H", "400", "--y", "7", "--weighted", "--x", "400"],
])
def test_commands_emit_json(capsys, argv):
    code, out, _ = _run(capsys, *argv, "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["tool"] == "smoothxyz" and "result" in doc


def test_run_config_validation():
    with pytest.raises(UsageError):
        RunConfig("psi", {"x": float("nan")}).validate()
    assert run(RunConfig("psi", {"x": 30.0, "y": 5.0}, format="xml")) == 2


def test_cache_dir_flag(tmp_path, capsys, monkeypatch):
    # run() exports the cache directory; keep it from leaking into other tests
    monkeypatch.setenv("SMOOTHXYZ_CACHE", "")
    code, _, _ = _run(capsys, "weights", "--tmax", "5", "--points", "3", "--cache-dir", str(tmp_path))
    assert code == 0


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "smoothxyz.cli", "psi", "--x", "30", "--y", "5"],
                       capture_output=True, text=True, check=False)
    assert r.returncode == 0 and r.stdout.strip() == "18"

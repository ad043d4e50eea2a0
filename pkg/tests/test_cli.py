from __future__ import annotations

import csv
import io
import json
import math
import subprocess
import sys

import pytest

from torsionlab import cli
from torsionlab.cli import COMMANDS, TIMESTAMP_KEY, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def report(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


def test_torsion_circle_report(capsys):
    rep = report(capsys, "torsion", "--circle", "L=6.2831853", "--alpha", "0.25")
    assert rep["logT"] == pytest.approx(0.5 * math.log(2), abs=1e-6)
    assert rep["passed"] is True
    assert rep["command"] == "torsion" and TIMESTAMP_KEY in rep


def test_torsion_untwisted_circle_exit_codes(capsys):
    code, _, err = run(capsys, "torsion", "--circle", "L=10", "--alpha", "0")
    assert code == 2 and "NotAcyclic" in err
    rep = report(capsys, "torsion", "--circle", "L=10", "--alpha", "0", "--kernel-removed")
    assert rep["logT"] == pytest.approx(math.log(10), abs=1e-6)


def test_exclusion_seed_seven(capsys):
    argv = ("exclusion", "--n", "2", "--N", "10", "--trials", "1000", "--seed", "7")
    first = report(capsys, *argv)
    assert first["passed"] is True
    assert first["min_distance"] >= first["radius"]
    assert first["trials"] == 1000


@pytest.mark.parametrize(
    "argv",
    [
        ("exclusion", "--n", "3", "--N", "100", "--trials", "200", "--seed", "11"),
        ("distance", "--n", "4", "--samples", "300", "--seed", "3"),
    ],
)
def test_same_seed_same_report(capsys, argv):
    a = report(capsys, *argv)
    b = report(capsys, *argv)
    a.pop(TIMESTAMP_KEY)
    b.pop(TIMESTAMP_KEY)
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_different_seed_changes_trials(capsys):
    base = ("exclusion", "--n", "2", "--N", "10", "--trials", "50", "--gamma", "[[1,10],[10,101]]")
    a = report(capsys, *base, "--seed", "1")
    b = report(capsys, *base, "--seed", "2")
    assert a["gamma"] == b["gamma"]
    assert a["min_distance"] != b["min_distance"]


def test_no_command_and_empty_config(capsys, tmp_path):
    assert run(capsys)[0] == 2
    empty = tmp_path / "empty.json"
    empty.write_text("")
    assert run(capsys, "--config", str(empty))[0] == 2
    empty.write_text("{}")
    assert run(capsys, "--config", str(empty))[0] == 2
    assert run(capsys, "--config", str(tmp_path / "missing.json"))[0] == 2


def test_config_file_runs_command(capsys, tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"command": "torsion", "circle": "L=6.2831853", "alpha": 0.5}))
    rep = report(capsys, "--config", str(cfg))
    assert rep["logT"] == pytest.approx(math.log(2), abs=1e-6)


@pytest.mark.parametrize(
    "argv",
    [
        ("torsion",),
        ("torsion", "--circle", "6.28"),
        ("zeta", "--circle", "L=abc"),
        ("dance", "--n", "2"),
        ("exclusion", "--gamma", "[[1,2],[0,1]]", "--N", "10"),
        ("distance", "--n", "x"),
        ("bogus",),
    ],
)
def test_bad_input_exits_two(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_malformed_spectrum_file(capsys, tmp_path):
    bad = tmp_path / "spec.json"
    bad.write_text(json.dumps({"dim": 1, "entries": [[-1.0, 1]]}))
    assert run(capsys, "zeta", "--spectrum", str(bad))[0] == 2
    bad.write_text("{not json")
    assert run(capsys, "heat", "--spectrum", str(bad))[0] == 2


@pytest.mark.parametrize("command", COMMANDS)
def test_selftests_pass(capsys, command):
    rep = report(capsys, command, "--selftest")
    assert rep["passed"] is True
    assert rep["selftest"]


def test_heat_csv_columns(capsys):
    code, out, _ = run(capsys, "heat", "--circle", "L=6.2831853", "--alpha", "0.3", "--K", "500",
                       "--t", "0.001", "0.1", "1", "10", "--format", "csv")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["t", "value", "tail_bound", "poisson"]
    for t, value, _, poisson in rows[1:]:
        assert float(value) == pytest.approx(float(poisson), rel=1e-10)


def test_csv_with_out_writes_both_files(capsys, tmp_path):
    out = tmp_path / "table.csv"
    code, _, _ = run(capsys, "dance", "--n", "2", "--lam", "3", "--C1", "1", "--C2", "1", "--C3", "1", "--C4", "1",
                     "--Cn", "1", "--levels", "100", "1000", "--format", "csv", "--out", str(out))
    assert code == 0
    rows = list(csv.reader(io.StringIO(out.read_text())))
    assert rows[0] == list(cli.dance.BudgetTable.COLUMNS)
    assert len(rows) == 3
    rep = json.loads(out.with_suffix(".json").read_text())
    assert rep["feasible"] is True
    assert rep["grid_beta"] == pytest.approx(rep["beta"], abs=1e-3)


def test_infeasible_budget_exits_one(capsys):
    code, out, _ = run(capsys, "dance", "--n", "5", "--lam", "3", "--C1", "1", "--C2", "1", "--C3", "1", "--C4", "4",
                       "--Cn", "1", "--epsilon", "0")
    assert code == 1
    assert json.loads(out)["feasible"] is False


def test_budget_file(capsys, tmp_path):
    path = tmp_path / "budget.json"
    path.write_text(json.dumps({"n": 3, "lambda": 4.0, "C1": 1, "C2": 0.5, "C3": 1, "C4": 2, "Cn": 1.5,
                                "levels": [10, 1000]}))
    rep = report(capsys, "dance", "--budget", str(path))
    assert rep["budget"]["lambda"] == 4.0
    assert rep["report"]["feasible"] is True


def test_zeta_report(capsys):
    rep = report(capsys, "zeta", "--circle", "L=6.2831853", "--alpha", "0.25", "--s", "2", "-0.5")
    assert rep["determinant"] == pytest.approx(4 * math.sin(math.pi / 4) ** 2, abs=1e-6)
    assert set(rep["values"]) == {"2.0", "-0.5"}


def test_console_entry_point(tmp_path):
    out = tmp_path / "r.json"
    proc = subprocess.run(
        [sys.executable, "-m", "torsionlab.cli", "torsion", "--circle", "L=6.2831853", "--alpha", "0.25",
         "--out", str(out)],
        capture_output=True, text=True, timeout=120,
    )
    assert proc.returncode == 0, proc.stderr
    assert json.loads(out.read_text())["logT"] == pytest.approx(0.5 * math.log(2), abs=1e-6)

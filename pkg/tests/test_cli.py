import csv
import io
import json
import subprocess
import sys

import pytest

from htype import __version__
from htype.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, main, parse_mult
from htype.cli import UsageError


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_table_n0(capsys):
    code, out, _ = run(capsys, "table", "--n", "0")
    assert code == EXIT_OK
    for dim in ("7", "12", "13", "14", "15", "24", "25"):
        assert f" {dim}" in out
    assert "—" in out
    assert f"htype {__version__}" in out.splitlines()[0]


def test_table_csv_is_plain(capsys):
    code, out, _ = run(capsys, "table", "--n", "2", "--format", "csv")
    assert code == EXIT_OK
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["k", "n", "dim"]
    assert rows[1:4] == [["2", "0", "7"], ["2", "1", "11"], ["2", "2", "15"]]


def test_json_header(capsys):
    code, out, _ = run(capsys, "table", "--n", "1", "--format", "json")
    doc = json.loads(out)
    assert doc["version"] == __version__
    assert doc["config"]["n"] == 1
    assert doc["tables"]["table"]["rows"][1][:4] == [2, "7+4n", 7, 11]


def test_verify_subset_passes(capsys):
    code, out, _ = run(capsys, "verify", "--k", "2", "--mult", "1", "--suites", "algebra,group,models", "--format", "json")
    doc = json.loads(out)
    assert code == EXIT_OK
    assert doc["summary"]["ok"] and doc["summary"]["failed"] == 0
    assert doc["space"] == {"k": 2, "mult": "1", "m": 4, "dim": 7, "Q": "4"}


def test_verify_tight_tolerance_fails(capsys):
    code, out, _ = run(capsys, "verify", "--k", "2", "--mult", "1", "--suites", "harmonic", "--tol-harmonic", "1e-12")
    assert code == EXIT_FAIL
    assert "FAIL" in out and "harmonic_direction_spread" in out


def test_verify_is_deterministic(capsys):
    argv = ("verify", "--suites", "algebra,haar", "--format", "json", "--seed", "3")
    first = run(capsys, *argv)[1]
    second = run(capsys, *argv)[1]
    assert first == second
    assert "seconds" not in first
    timed = run(capsys, *argv, "--timing")[1]
    assert "suite_seconds" in timed


@pytest.mark.parametrize(
    "k, mult, verdict",
    [("2", "1", "nonsymmetric"), ("3", "1+1", "nonsymmetric"), ("3", "2", "symmetric"), ("1", "2", "symmetric")],
)
def test_curvature_verdict(capsys, k, mult, verdict):
    code, out, _ = run(capsys, "curvature", "--k", k, "--mult", mult, "--format", "json", "--subgroups", "2")
    doc = json.loads(out)
    assert code == EXIT_OK
    assert doc["results"]["verdict"] == verdict == doc["results"]["expected"]


def test_density_command(capsys):
    code, out, _ = run(capsys, "density", "--rho-max", "2", "--samples", "4", "--format", "csv")
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [float(r["rho"]) for r in rows] == [0.5, 1.0, 1.5, 2.0]
    assert all(float(r["rel_error"]) < 1e-5 for r in rows)


def test_geodesic_command(capsys):
    code, out, _ = run(capsys, "geodesic", "--directions", "2", "--length", "0.5", "--step", "5e-3", "--format", "json")
    doc = json.loads(out)
    assert code == EXIT_OK
    last = doc["tables"]["path"]["rows"][-1]
    assert last[1] == pytest.approx(0.5) and last[3] == pytest.approx(0.5, abs=1e-6)


def test_heat_command(capsys):
    code, out, _ = run(capsys, "heat", "--n-grid", "301", "--n-steps", "200", "--rho-max", "6", "--format", "json")
    doc = json.loads(out)
    assert code == EXIT_OK
    ledger = doc["tables"]["ledger"]["rows"]
    assert max(r[2] for r in ledger) < 1e-4
    assert {c["name"] for c in doc["checks"]} >= {"heat_mass_drift", "heat_min_value"}


def test_heat_absorbing_has_no_mass_check(capsys):
    code, out, _ = run(capsys, "heat", "--n-grid", "201", "--n-steps", "100", "--rho-max", "4", "--boundary", "absorbing", "--format", "json")
    doc = json.loads(out)
    assert "heat_mass_drift" not in {c["name"] for c in doc["checks"]}


def test_config_file_and_override(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"rho-max": 2.0, "samples": 3, "format": "json"}))
    code, out, _ = run(capsys, "density", "--config", str(cfg), "--samples", "2")
    doc = json.loads(out)
    assert code == EXIT_OK
    assert doc["config"]["rho_max"] == 2.0 and doc["config"]["samples"] == 2
    assert len(doc["tables"]["density"]["rows"]) == 2


@pytest.mark.parametrize(
    "content",
    ['{"bogus": 1}', '{"samples": "many"}', '{"format": "yaml"}', "not json", '{"nested": {"a": 1}}'],
)
def test_bad_config(capsys, tmp_path, content):
    cfg = tmp_path / "c.json"
    cfg.write_text(content)
    code, _, err = run(capsys, "density", "--config", str(cfg))
    assert code == EXIT_USAGE
    assert "error" in err


def test_usage_errors(capsys):
    assert run(capsys, "curvature", "--mult", "1+x")[0] == EXIT_USAGE
    assert run(capsys, "curvature", "--k", "2", "--mult", "1+1")[0] == EXIT_USAGE
    assert run(capsys, "verify", "--suites", "nope")[0] == EXIT_USAGE
    assert run(capsys, "table", "--format", "csv", "--table", "missing")[0] == EXIT_USAGE
    with pytest.raises(SystemExit) as exc:
        main(["density", "--samples", "0"])
    assert exc.value.code == EXIT_USAGE


def test_out_file_matches_stdout(capsys, tmp_path):
    target = tmp_path / "out.json"
    stdout = run(capsys, "table", "--n", "1", "--format", "json")[1]
    run(capsys, "table", "--n", "1", "--format", "json", "--out", str(target))
    assert target.read_text() == stdout


def test_parse_mult():
    assert parse_mult("2", 2) == 2
    assert parse_mult("2", 3) == (2, 0)
    assert parse_mult("1+1", 7) == (1, 1)
    with pytest.raises(UsageError):
        parse_mult("1+1+1", 3)


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "htype.cli", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and __version__ in proc.stdout


def test_verify_all_suites_small_space(capsys):
    code, out, _ = run(capsys, "verify", "--k", "1", "--geodesic-directions", "2", "--format", "json")
    doc = json.loads(out)
    assert code == EXIT_OK, [c for c in doc["checks"] if not c["passed"]]
    suites = {c["name"].split("_")[0] for c in doc["checks"]}
    assert {"clifford", "group", "haar", "cayley", "density", "geodesic", "harmonic", "heat"} <= suites
    assert doc["results"] == {"expected_symmetric": True, "symmetric": True}

import csv
import io
import json
import subprocess
import sys

import pytest

jsonschema = pytest.importorskip("jsonschema")

from schattenvar.cli import main
from schattenvar.schemas import SCHEMAS


@pytest.fixture
def files(tmp_path):
    ident = tmp_path / "ident.json"
    ident.write_text("[1, 1, 1]")
    s123 = tmp_path / "s123.json"
    s123.write_text("[1, 2, 3]")
    diag = tmp_path / "diag.csv"
    diag.write_text("3,0\n0,4\n")
    near_rank_one = tmp_path / "r1.json"
    near_rank_one.write_text("[1.0, 1e-6]")
    return {"ident": str(ident), "s123": str(s123), "diag": str(diag), "r1": str(near_rank_one), "dir": tmp_path}


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, schema, *argv):
    code, out, err = run(capsys, *argv)
    report = json.loads(out)
    jsonschema.validate(report, SCHEMAS[schema])
    return code, report


def test_estimate_reps(capsys, files):
    code, rep = run_json(capsys, "estimate", "estimate", "--spectrum", files["ident"],
                         "--p", 2, "--n", 6, "--seed", 1, "--reps", 1000)
    assert code == 0
    assert rep["target"] == 3
    st = rep["stats"]
    assert abs(st["empirical_mean"] - 3) <= 4 * st["stderr_mean"]
    assert rep["manifest"]["seed"] == 1 and len(rep["manifest"]["inputs"]) == 1


def test_estimate_matrix(capsys, files):
    code, rep = run_json(capsys, "estimate", "estimate", "--matrix", files["diag"], "--p", 2, "--n", 4, "--seed", 7)
    assert code == 0 and rep["target"] == pytest.approx(337)
    assert isinstance(rep["estimate"], float)


def test_estimate_n_less_than_p(capsys, files):
    code, out, err = run(capsys, "estimate", "--spectrum", files["ident"], "--p", 5, "--n", 3, "--seed", 0)
    assert code == 2 and "n must be ≥ p" in err and out == ""


@pytest.mark.parametrize("content", ["[1, 2", "{\"a\": 1}", "[1, -5]"])
def test_bad_spectrum_file(capsys, files, content):
    bad = files["dir"] / "bad.json"
    bad.write_text(content)
    code, _, err = run(capsys, "variance", "--spectrum", bad, "--p", 2, "--n", 4)
    assert code == 2 and err.startswith("schattenvar: error:")


def test_missing_and_malformed_inputs(capsys, files):
    code, _, _ = run(capsys, "variance", "--spectrum", files["dir"] / "nope.json", "--p", 2, "--n", 4)
    assert code == 2
    ragged = files["dir"] / "ragged.csv"
    ragged.write_text("1,2\n3\n")
    code, _, _ = run(capsys, "estimate", "--matrix", ragged, "--p", 1, "--n", 2, "--seed", 0)
    assert code == 2


def test_variance_methods(capsys, files):
    values = {}
    for method in ("recursion", "brute", "oracle"):
        code, rep = run_json(capsys, "variance", "variance", "--spectrum", files["ident"],
                             "--p", 2, "--n", 6, "--method", method)
        assert code == 0 and rep["method"] == method
        values[method] = rep["variance"]
    assert values["recursion"] == pytest.approx(5.6, rel=1e-12)
    assert values["brute"] == pytest.approx(5.6, rel=1e-10)
    assert values["oracle"] == pytest.approx(5.6, rel=1e-10)


def test_variance_hutchinson(capsys, files):
    _, rep = run_json(capsys, "variance", "variance", "--spectrum", files["s123"], "--p", 1, "--n", 10)
    assert rep["variance"] == pytest.approx(2.8, rel=1e-12)


def test_variance_literal_method(capsys, files):
    code, rep = run_json(capsys, "variance", "variance", "--spectrum", files["ident"],
                         "--p", 2, "--n", 6, "--method", "paper-literal")
    assert code == 0
    assert rep["discrepancy"] == pytest.approx(-2.0) and rep["discrepancy"] != 0
    assert rep["recursion_variance"] == pytest.approx(5.6)


def test_size_guard_exit(capsys, files):
    code, _, err = run(capsys, "variance", "--spectrum", files["ident"], "--p", 6, "--n", 12, "--method", "brute")
    assert code == 3 and "limit" in err


def test_bounds_single(capsys, files):
    code, rep = run_json(capsys, "bounds", "bounds", "--spectrum", files["ident"], "--p", 2, "--n", 6)
    row = rep["bounds"][0]
    assert code == 0
    assert row["new_bound"] == pytest.approx(13.40, abs=5e-3)
    assert row["exact_variance"] == pytest.approx(5.6)
    _, rep = run_json(capsys, "bounds", "bounds", "--spectrum", files["ident"], "--p", 2, "--n", 3)
    assert rep["bounds"][0]["b1"] == 0 and rep["bounds"][0]["b2"] == 0


def test_bounds_grid_csv(capsys):
    code, out, _ = run(capsys, "bounds", "--grid", "2", "8", "4", "--format", "csv")
    assert code == 0
    assert out.endswith("\r\n")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert list(rows[0]) == ["p", "n", "d", "b1", "b2", "b3", "b4", "new_bound", "kv_bound",
                             "exact_variance", "slack", "ratio"]
    assert float(rows[0]["ratio"]) < 1e-6
    code, out, _ = run(capsys, "bounds", "--grid", "2:3", "4,6", "2:3", "--format", "csv")
    assert len(list(csv.DictReader(io.StringIO(out)))) == 8


def test_bounds_needs_p_and_n():
    with pytest.raises(SystemExit) as exc:
        main(["bounds"])
    assert exc.value.code == 2


def test_validate_pass_and_schema(capsys):
    code, rep = run_json(capsys, "validate", "validate", "--reps", 20000)
    assert code == 0 and rep["passed"] is True
    assert {e["id"] for e in rep["errata"]} >= {"closed_form_M", "variance_representation"}


def test_validate_failure_exit(capsys, files):
    code, rep = run_json(capsys, "validate", "validate", "--spectrum", files["r1"], "--p", 2, "--n", 4,
                         "--reps", 20000)
    assert code == 4 and rep["passed"] is False
    failed = [c["name"] for c in rep["checks"] if c["status"] == "fail"]
    assert failed == ["bound_soundness"]


def test_validate_guard_skip(capsys):
    code, rep = run_json(capsys, "validate", "validate", "--p", 4, "--n", 8, "--d", 6, "--reps", 2000)
    statuses = {c["name"]: c["status"] for c in rep["checks"]}
    assert statuses["brute_variance"] == "skip"


def test_text_format_and_output_file(capsys, files):
    target = files["dir"] / "out.txt"
    code, out, _ = run(capsys, "variance", "--spectrum", files["ident"], "--p", 2, "--n", 6,
                       "--format", "text", "-o", target)
    assert code == 0 and out == ""
    text = target.read_text()
    assert "variance: 5.6" in text and "per_q: q=2" in text


def test_threads_do_not_change_output(capsys, files, monkeypatch):
    args = ["estimate", "--spectrum", files["s123"], "--p", 2, "--n", 5, "--seed", 3, "--reps", 3000]
    _, a, _ = run(capsys, *args, "--threads", 1)
    _, b, _ = run(capsys, *args, "--threads", 4)
    monkeypatch.setenv("SCHATTEN_THREADS", "3")
    _, c, _ = run(capsys, *args)
    assert a == b == c


def test_console_script():
    proc = subprocess.run([sys.executable, "-m", "schattenvar.cli", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip() == "0.1.0"

import io
import json

import pytest

from hktsusy.cli import SEED_ENV, main


def run(argv, monkeypatch=None):
    out = io.StringIO()
    code = main(argv, out=out)
    return code, out.getvalue()


def test_zoo_lists_entries():
    code, text = run(["zoo"])
    assert code == 0
    assert "hopf" in text and "sd_gauge" in text and "[gauge]" in text


def test_verify_writes_json(tmp_path):
    out = tmp_path / "report.json"
    code, text = run(["verify", "--manifold", "conf_flat_s4", "--points", "2", "--seed", "7",
                      "--output", str(out)])
    assert code == 0
    assert "overall: PASS" in text
    data = json.loads(out.read_text())
    assert data["seed"] == 7 and data["summary"]["passed"]


def test_default_output_path(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    code, _ = run(["verify", "--manifold", "flat_r4", "--points", "1"])
    assert code == 0
    assert (tmp_path / "hktsusy_report.json").exists()


def test_json_to_stdout_without_file(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    code, text = run(["verify", "--manifold", "flat_r4", "--points", "1", "--json", "--output", "-",
                      "--checks", "classify,n4"])
    assert code == 0
    assert json.loads(text)["checks"] == ["classify", "n4"]
    assert not list(tmp_path.iterdir())


def test_failing_check_exits_one(capsys):
    code, text = run(["verify", "--manifold", "sd_gauge", "--points", "1", "--output", "-",
                      "--checks", "gauge"])
    assert code == 1
    assert "commutant" in text and "FAIL (expected)" in text


@pytest.mark.parametrize(
    "argv",
    [
        ["verify", "--manifold", "atlantis"],
        ["verify", "--manifold", "flat_r4", "--points", "0"],
        ["verify", "--manifold", "flat_r4", "--checks", "bogus"],
        ["verify", "--manifold", "flat_r4", "--tol", "n4=abc"],
        ["verify"],
        ["frobnicate"],
        ["explain", "--manifold", "flat_r4", "--point", "1,2"],
        ["verify", "--config", "/nonexistent/run.ini"],
    ],
)
def test_usage_errors_exit_two(argv, capsys):
    code, _ = run(argv)
    assert code == 2
    assert capsys.readouterr().err


def test_config_error_reports_position(tmp_path, capsys):
    path = tmp_path / "bad.ini"
    path.write_text("[run]\npoints = lots\n")
    code, _ = run(["verify", "--config", str(path)])
    assert code == 2
    assert "line 2, column 10" in capsys.readouterr().err


def test_seed_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(SEED_ENV, "42")
    out = tmp_path / "r.json"
    run(["verify", "--manifold", "flat_r4", "--points", "1", "--output", str(out)])
    assert json.loads(out.read_text())["seed"] == 42
    run(["verify", "--manifold", "flat_r4", "--points", "1", "--seed", "3", "--output", str(out)])
    assert json.loads(out.read_text())["seed"] == 3
    monkeypatch.setenv(SEED_ENV, "x")
    assert run(["verify", "--manifold", "flat_r4", "--points", "1", "--output", "-"])[0] == 2


def test_classify_command():
    code, text = run(["classify", "--manifold", "hopf", "--manifold", "broken_complex", "--points", "2"])
    assert code == 0
    assert "HKT x2" in text and "generic x2" in text
    assert "MISMATCH" not in text


def test_explain_prints_charges():
    code, text = run(["explain", "--manifold", "conf_flat_s4", "--point", "0.1,0.2,0.3,0.4"])
    assert code == 0
    for block in ("[Q]", "[S1]", "[S3]", "[F2]", "[H]"):
        assert block in text
    assert "Pi_1" in text


def test_help_exits_zero(capsys):
    assert run(["--help"])[0] == 0

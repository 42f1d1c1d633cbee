import json
import re
import subprocess
import sys

import pytest

from spherepinch.cli import ConfigError, RunConfig, main, parse_config_file, run


def run_cli(args, tmp_path, name="out"):
    out = tmp_path / name
    code = main([*args, "--output", str(out)])
    return code, out.read_text() if out.exists() else ""


def strip_timestamp(text):
    return re.sub(r"timestamp[^\n]*", "", text)


def test_spectrum_round_csv(tmp_path):
    code, text = run_cli(["spectrum", "--family", "round", "--n", "3", "--N", "1000", "--lmax", "20"], tmp_path)
    assert code == 0
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    assert lines[0] == "lambda,multiplicity,m,l,N,extrapolated,raw"
    vals = []
    for row in lines[1:]:
        lam, mult = row.split(",")[:2]
        vals += [float(lam)] * int(mult)
    expected = [0.0] + [3.0] * 4 + [8.0] * 9 + [15.0] * 16
    assert len(vals) == len(expected)
    assert all(abs(a - b) <= 1e-4 * max(b, 1) for a, b in zip(vals, expected))
    assert "# command=spectrum" in text and "# version=" in text
    for row in lines[1:]:
        field = row.split(",")[0]
        assert field == format(float(field), ".17g")


def test_sweep_rows_ordered_and_approaching(tmp_path):
    code, text = run_cli(
        ["sweep", "--command", "spectrum", "--n", "3", "--k", "10000,100,1000", "--lmax", "6", "--N", "1000", "--format", "json"],
        tmp_path,
    )
    assert code == 0
    doc = json.loads(text)
    assert doc["schema"] == 1 and doc["config"]["k"] == [10000, 100, 1000]
    ks = [row[0] for row in doc["rows"]]
    assert ks == [100, 1000, 10000]
    i1 = doc["columns"].index("lambda_1")
    gaps = [abs(row[i1] - 3) for row in doc["rows"]]
    assert gaps[0] > gaps[1] > gaps[2]


def test_sweep_marks_failed_rows(tmp_path):
    code, text = run_cli(["sweep", "--command", "phi", "--k", "100,1000", "--N", "500", "--counts", "3,2,2", "--resolution", "32", "--format", "json"], tmp_path)
    doc = json.loads(text)
    assert len(doc["rows"]) == 2
    status = doc["columns"].index("status")
    assert all(row[status] == "failed" for row in doc["rows"])
    assert code == 4


def test_validate(tmp_path):
    code, text = run_cli(["validate", "--family", "pinch", "--n", "3", "--k", "1000"], tmp_path)
    assert code == 0 and "# summary.passed=true" in text


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("command = volume\nfamily = pinch\nk = 100  # comment\nformat = json\n")
    code, text = run_cli(["--config", str(cfg), "--k", "1000"], tmp_path)
    assert code == 0
    doc = json.loads(text)
    assert doc["config"]["k"] == [1000] and doc["config"]["command"] == "volume"
    assert 0 < doc["summary"]["ratio_to_round"] < 0.1


@pytest.mark.parametrize(
    "args",
    [["bogus"], ["spectrum", "--N", "10"], ["spectrum", "--unknown", "1"], ["gh", "--family", "round"], ["spectrum", "--n", "x"]],
)
def test_config_errors(args, tmp_path, capsys):
    code, _ = run_cli(args, tmp_path)
    assert code == 2
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1 and err[0].startswith("config error")


def test_unknown_key_in_file(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("command=volume\ncolour=red\n")
    with pytest.raises(ConfigError, match="unknown config key"):
        RunConfig.from_mapping(parse_config_file(str(cfg)))


def test_numerical_error_exit(tmp_path, capsys):
    code, _ = run_cli(["phi", "--family", "pinch", "--k", "100", "--N", "500", "--counts", "3,2,2", "--resolution", "32"], tmp_path)
    assert code == 3
    assert "map undefined at sample point" in capsys.readouterr().err


def test_reports_reproducible(tmp_path):
    args = ["curvature", "--k", "1000", "--grid-points", "64"]
    _, a = run_cli(args, tmp_path)
    _, b = run_cli(args, tmp_path)
    assert strip_timestamp(a) == strip_timestamp(b)
    cfg = RunConfig.from_mapping({"command": "gh", "k": "1000", "resolution": "32", "counts": "3,2,4", "format": "json", "output": str(tmp_path / "gh.json")})
    _, t1 = run(cfg, timestamp="T")
    _, t2 = run(cfg, timestamp="T")
    assert t1 == t2
    doc = json.loads(t1)
    assert {"k", "resolution", "max_distortion", "covering_defect", "circle_fiber_max"} <= set(doc["summary"])


def test_distance_pair_and_matrix(tmp_path):
    code, text = run_cli(["distance", "--family", "round", "--x", "0,0,0", "--y", "0,0,1", "--resolution", "64", "--format", "json"], tmp_path)
    assert code == 0
    assert json.loads(text)["summary"]["distance"] == pytest.approx(1.0, rel=0.02)
    code, text = run_cli(["distance", "--family", "pinch", "--k", "100", "--counts", "2,2,2", "--resolution", "32"], tmp_path, "m")
    rows = [ln for ln in text.splitlines() if not ln.startswith("#")]
    assert code == 0 and len(rows) == 1 + 8 * 7 // 2


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "spherepinch.cli", "validate", "--family", "round"], capture_output=True, text=True
    )
    assert proc.returncode == 0 and "summary.passed=true" in proc.stdout

import csv
import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest

from dfw.cli import DEFAULTS, SCHEMAS, effective_config, main

HERE = os.path.dirname(__file__)
ROD_CONFIG = os.path.join(HERE, "data", "rod.json")
GOLDEN = os.path.join(HERE, "data", "golden_rod.csv")


def _write(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(obj if isinstance(obj, str) else json.dumps(obj))
    return str(path)


def _rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


def _samples_csv(path, pts, f, extra=None):
    n = pts.shape[1]
    head = [f"x{i + 1}" for i in range(n)] + (["w"] if extra is not None else []) + ["f"]
    lines = [",".join(head)]
    for k, p in enumerate(pts):
        vals = list(p) + ([extra[k]] if extra is not None else []) + [f[k]]
        lines.append(",".join(repr(float(v)) for v in vals))
    return _write(path, "\n".join(lines) + "\n")


def test_missing_config_exits_2_without_outputs(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["eigen", "--config", str(tmp_path / "nope.json"), "--out", str(out)]) == 2
    assert not out.exists()
    assert "not found" in capsys.readouterr().err


def test_no_config_flag_exits_2():
    assert main(["eigen"]) == 2


@pytest.mark.parametrize("command", sorted(DEFAULTS))
def test_print_defaults_is_a_valid_config(command, capsys):
    assert main([command, "--print-defaults"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["command"] == command
    assert effective_config(command, doc) == DEFAULTS[command]


@pytest.mark.parametrize("bad", [
    {"unknown": 1},
    {"kernel": {"family": "helmholtz_regular", "colour": "red"}},
    {"r": {"count": 0}},
    {"command": "eigen"},
])
def test_schema_rejections(tmp_path, bad, capsys):
    cfg = _write(tmp_path / "c.json", bad)
    assert main(["kernel-table", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    assert not (tmp_path / "o").exists()


def test_nan_in_config_exits_2(tmp_path):
    cfg = _write(tmp_path / "c.json", '{"kernel": {"scale": NaN}}')
    assert main(["kernel-table", "--config", cfg, "--out", str(tmp_path)]) == 2


def test_kernel_table_phi3_node_at_r1(tmp_path):
    cfg = _write(tmp_path / "c.json", {"kernel": {"family": "helmholtz_regular", "n": 3, "scale": math.pi},
                                        "r": {"start": 0.0, "stop": 10.0, "count": 101}})
    assert main(["kernel-table", "--config", cfg, "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "kernel_table.csv")
    assert rows[0] == ["r", "value"] and len(rows) == 102
    at1 = [r for r in rows[1:] if float(r[0]) == 1.0]
    assert len(at1) == 1 and abs(float(at1[0][1])) < 1e-12
    assert float(rows[1][1]) == 1.0


def test_kernel_table_complex_and_anisotropic(tmp_path):
    cfg = _write(tmp_path / "c.json", {"kernel": {"family": "helmholtz_outgoing", "n": 2, "scale": 1.0},
                                        "r": {"start": 0.5, "stop": 2.0, "count": 4}})
    assert main(["kernel-table", "--config", cfg, "--out", str(tmp_path)]) == 0
    assert _rows(tmp_path / "kernel_table.csv")[0] == ["r", "re", "im"]
    cfg = _write(tmp_path / "d.json", {"kernel": {"family": "convdiff_rapid", "n": 2,
                                                   "convection": {"velocity": [1.0, 0.0], "diffusivity": 1.0},
                                                   "direction": [0.0, 1.0]}})
    assert main(["kernel-table", "--config", cfg, "--out", str(tmp_path / "a")]) == 0
    cfg = _write(tmp_path / "e.json", {"kernel": {"family": "convdiff_rapid", "n": 2}})
    assert main(["kernel-table", "--config", cfg, "--out", str(tmp_path / "b")]) == 2


def test_diffuse_matches_golden_file(tmp_path):
    assert main(["diffuse", "--config", ROD_CONFIG, "--out", str(tmp_path)]) == 0
    got = _rows(tmp_path / "solution.csv")
    ref = _rows(GOLDEN)
    assert got[0] == ref[0] == ["x1", "t", "u"]
    assert len(got) == len(ref) == 1 + 2 * 50
    g = np.array(got[1:], dtype=float)
    r = np.array(ref[1:], dtype=float)
    assert np.array_equal(g[:, :2], r[:, :2])
    assert np.max(np.abs(g[:, 2] - r[:, 2])) < 1e-9
    # the golden file itself agrees with the analytic decay of sin(pi x)
    exact = np.exp(-math.pi**2 * r[:, 1]) * np.sin(math.pi * r[:, 0])
    assert np.max(np.abs(r[:, 2] - exact)) < 1e-3


def test_byte_identical_reruns(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["diffuse", "--config", ROD_CONFIG, "--out", str(a)]) == 0
    assert main(["diffuse", "--config", ROD_CONFIG, "--out", str(b)]) == 0
    names = sorted(os.listdir(a))
    assert names == sorted(os.listdir(b)) == ["diffusion.json", "report.json", "solution.csv"]
    for name in names:
        assert (a / name).read_bytes() == (b / name).read_bytes()
        assert b"\r" not in (a / name).read_bytes()


def test_diffuse_rows_are_times_by_probes(tmp_path):
    cfg = json.load(open(ROD_CONFIG))
    cfg["times"] = [0.0, 0.01, 0.2]
    cfg["probes"] = {"count": 7}
    assert main(["diffuse", "--config", _write(tmp_path / "c.json", cfg), "--out", str(tmp_path)]) == 0
    assert len(_rows(tmp_path / "solution.csv")) == 1 + 3 * 7
    report = json.load(open(tmp_path / "report.json"))
    assert {"path": "solution.csv", "rows": 21} in report["files"]


def test_diffuse_from_data_samples(tmp_path):
    x = np.linspace(0, 1, 41)[:, None]
    data = _samples_csv(tmp_path / "r.csv", x, np.sin(math.pi * x[:, 0]))
    cfg = json.load(open(ROD_CONFIG))
    cfg["initial"] = {"kind": "data"}
    assert main(["diffuse", "--config", _write(tmp_path / "c.json", cfg), "--data", data, "--out", str(tmp_path)]) == 0
    g = np.array(_rows(tmp_path / "solution.csv")[1:], dtype=float)
    exact = np.exp(-math.pi**2 * g[:, 1]) * np.sin(math.pi * g[:, 0])
    assert np.max(np.abs(g[:, 2] - exact)) < 1e-3


def test_eigen_outputs(tmp_path):
    cfg = _write(tmp_path / "c.json", {"lam_range": [1.0, 10.0]})
    assert main(["eigen", "--config", cfg, "--out", str(tmp_path)]) == 0
    doc = json.load(open(tmp_path / "eigenvalues.json"))
    assert np.allclose(doc["eigenvalues"], [math.pi, 2 * math.pi, 3 * math.pi], atol=1e-3)
    rows = _rows(tmp_path / "indicator.csv")
    assert rows[0] == ["lambda", "indicator"] and len(rows) == 201


def test_fit_round_trip_reproduces_residual(tmp_path):
    rng = np.random.default_rng(3)
    pts = rng.uniform(-0.9, 0.9, (200, 2))
    pts = pts[np.linalg.norm(pts, axis=1) < 0.95]
    f = np.cos(pts[:, 0]) + pts[:, 1] ** 2
    data = _samples_csv(tmp_path / "s.csv", pts, f)
    cfg = _write(tmp_path / "c.json", {"domain": {"kind": "disk", "center": [0, 0], "radius": 1.0},
                                        "eigenvalues": [2.404825557695773, 5.520078110286311],
                                        "center_count": 5, "constant": True})
    assert main(["fit", "--config", cfg, "--data", data, "--out", str(tmp_path / "f")]) == 0
    fitted = json.load(open(tmp_path / "f" / "report.json"))["diagnostics"]["residual"]
    cfg2 = _write(tmp_path / "e.json", {"series": str(tmp_path / "f" / "series.json")})
    assert main(["fit", "--config", cfg2, "--data", data, "--out", str(tmp_path / "g")]) == 0
    again = json.load(open(tmp_path / "g" / "report.json"))["diagnostics"]["residual"]
    assert abs(again - fitted) < 1e-12
    assert _rows(tmp_path / "g" / "residuals.csv")[0] == ["x1", "x2", "f", "fitted", "residual"]


def test_fit_numeric_failure_exits_1(tmp_path, capsys):
    x = np.linspace(0, 1, 20)[:, None]
    data = _samples_csv(tmp_path / "s.csv", x, x[:, 0])
    cfg = _write(tmp_path / "c.json", {"domain": {"kind": "interval", "a": 0, "b": 1}, "lam_range": [0.5, 2.5]})
    assert main(["fit", "--config", cfg, "--data", data, "--out", str(tmp_path / "o")]) == 1
    assert "numeric failure" in capsys.readouterr().err
    assert not (tmp_path / "o").exists()


def test_transform_csv_columns(tmp_path):
    x = np.linspace(-8, 8, 401)
    w = np.full_like(x, x[1] - x[0])
    w[[0, -1]] /= 2
    data = _samples_csv(tmp_path / "s.csv", x[:, None], np.exp(-x**2), extra=w)
    cfg = _write(tmp_path / "c.json", {"kind": "j", "lambdas": {"max": 4.0, "count": 8},
                                        "xi": {"start": -1, "stop": 1, "count": 3}})
    assert main(["transform", "--config", cfg, "--data", data, "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "field.csv")
    assert rows[0] == ["lambda", "xi_1", "re", "im"] and len(rows) == 1 + 8 * 3


def test_ridge_command(tmp_path):
    rng = np.random.default_rng(5)
    pts = rng.uniform(-1, 1, (150, 2))
    data = _samples_csv(tmp_path / "s.csv", pts, np.sign(pts[:, 0]))
    cfg = _write(tmp_path / "c.json", {"centers": [[-0.3, 0], [0.3, 0], [0, 0.5]], "scales": [1.0, 2.0],
                                        "directions": 4})
    assert main(["ridge", "--config", cfg, "--data", data, "--out", str(tmp_path)]) == 0
    doc = json.load(open(tmp_path / "ridgelet.json"))
    assert len(doc["coeffs"]) == 4 * 2 * 3
    assert len(_rows(tmp_path / "residuals.csv")) == 151


@pytest.mark.parametrize("body,line", [
    ("x1,x2,f\n0.1,0.2,1.0\n0.3,0.4\n", 3),
    ("x1,x2,f\n0.1,0.2,1.0\n0.3,0.4,abc\n", 3),
    ("x1,x2,f\n0.1,0.2,1.0\n0.3,0.4,1\n0.5,nan,1\n", 4),
    ("x1,x2,f\n0.1,0.2,inf\n", 2),
    ("a,b,c\n1,2,3\n", 1),
])
def test_malformed_csv_reports_line(tmp_path, capsys, body, line):
    data = _write(tmp_path / "bad.csv", body)
    cfg = _write(tmp_path / "c.json", {"centers": [[0, 0]], "scales": [1.0]})
    assert main(["ridge", "--config", cfg, "--data", data, "--out", str(tmp_path / "o")]) == 2
    assert f"line {line}" in capsys.readouterr().err
    assert not (tmp_path / "o").exists()


def test_invalid_config_is_reported_before_data(tmp_path, capsys):
    cfg = _write(tmp_path / "c.json", {"scales": [-1.0]})
    assert main(["ridge", "--config", cfg, "--data", str(tmp_path / "missing.csv")]) == 2
    err = capsys.readouterr().err
    assert "config invalid" in err and "missing.csv" not in err


def test_unwritable_output_exits_1(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    cfg = _write(tmp_path / "c.json", {})
    assert main(["kernel-table", "--config", cfg, "--out", str(blocker / "sub")]) == 1


def test_bad_thread_setting_exits_2(tmp_path, monkeypatch):
    monkeypatch.setenv("DFW_THREADS", "-3")
    assert main(["kernel-table", "--config", _write(tmp_path / "c.json", {}), "--out", str(tmp_path)]) == 2


def test_schemas_cover_defaults():
    assert set(SCHEMAS) == set(DEFAULTS)


def test_console_entry_point(tmp_path):
    cfg = _write(tmp_path / "c.json", {})
    proc = subprocess.run([sys.executable, "-m", "dfw.cli", "kernel-table", "--config", cfg, "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["files"][0] == {"path": "kernel_table.csv", "rows": 101}

import json
import subprocess
import sys
from pathlib import Path

import pytest

from cnlslab.cli import main

N = "2048"  # coarse CLI-test resolution


def run_cli(*argv):
    return main(list(argv))


def read_csv(path):
    lines = Path(path).read_text().splitlines()
    assert lines[0].startswith("# schema: cnlslab/")
    header = lines[1].split(",")
    rows = [dict(zip(header, line.split(","))) for line in lines[2:]]
    return lines[0], rows


def test_ground_state_command(tmp_path):
    code = run_cli("ground-state", "--d", "3", "--a", "-0.1875", "--n", N,
                   "--out", str(tmp_path))
    assert code == 0
    schema, rows = read_csv(tmp_path / "ground_state.csv")
    assert "bundle" in schema
    row = rows[0]
    assert abs(float(row["m_a"]) - 1.0684160546) < 1e-6
    assert float(row["pohozaev_resid"]) < 1e-4
    assert (tmp_path / "ground_state_field.csv").exists()


def test_ground_state_admissibility_exit(tmp_path, capsys):
    code = run_cli("ground-state", "--d", "3", "--a", "-0.3", "--out", str(tmp_path))
    assert code == 2
    assert "positivity bound" in capsys.readouterr().err


def test_classify_scatter_example(tmp_path):
    code = run_cli("classify", "--d", "3", "--a", "0", "--n", N,
                   "--family", "scaled_ground", "--c", "0.5", "--out", str(tmp_path))
    assert code == 0
    _, rows = read_csv(tmp_path / "verdict.csv")
    assert rows[0]["region"] == "ScatterSub"


def test_classify_blowup_example(tmp_path):
    code = run_cli("classify", "--d", "3", "--a", "0", "--n", N,
                   "--family", "scaled_ground", "--c", "1.2", "--s", "100",
                   "--out", str(tmp_path))
    assert code == 0
    _, rows = read_csv(tmp_path / "verdict.csv")
    assert rows[0]["region"] == "BlowupSub"


def test_classify_ground_state_above_threshold(tmp_path):
    code = run_cli("classify", "--d", "3", "--a", "0", "--n", N,
                   "--family", "scaled_ground", "--c", "1.0", "--out", str(tmp_path))
    assert code == 0
    _, rows = read_csv(tmp_path / "verdict.csv")
    assert rows[0]["region"] == "AboveThreshold"


def test_classify_unknown_family(tmp_path, capsys):
    code = run_cli("classify", "--family", "wavelet", "--n", N, "--out", str(tmp_path))
    assert code == 2
    assert "unknown family" in capsys.readouterr().err


def test_evolve_command_and_jsonl(tmp_path):
    code = run_cli("evolve", "--d", "3", "--a", "-0.1875", "--n", N,
                   "--family", "gaussian", "--c", "0.4", "--dt", "1e-3",
                   "--tend", "0.1", "--monitors", "virial", "--out", str(tmp_path))
    assert code == 0
    lines = (tmp_path / "trajectory.jsonl").read_text().splitlines()
    head = json.loads(lines[0])
    assert head["schema"] == "cnlslab/trajectory/v1"
    body = json.loads(lines[1])
    assert {"t", "mass", "e_a", "kinetic_sq", "delta"} <= set(body)
    assert {"R", "v_r", "i_r", "f_r", "f_r_c", "f_inf_c", "chi"} <= set(body["virial"][0])
    _, rows = read_csv(tmp_path / "summary.csv")
    assert rows[0]["termination"] == "Completed"
    assert (tmp_path / "checkpoint.csv").exists()


def test_evolve_blowup_exit_code(tmp_path):
    code = run_cli("evolve", "--d", "3", "--a", "-0.1875", "--n", N,
                   "--family", "gaussian", "--c", "2.5", "--dt", "1e-3",
                   "--tend", "2.0", "--out", str(tmp_path))
    assert code == 3


def test_evolve_unknown_monitor(tmp_path, capsys):
    code = run_cli("evolve", "--n", N, "--monitors", "spectral", "--out", str(tmp_path))
    assert code == 2


def test_sweep_empty_grid_usage_error(tmp_path, capsys):
    code = run_cli("sweep", "--c-grid", ",", "--n", N, "--out", str(tmp_path))
    assert code == 2


def test_sweep_inadmissible_a(tmp_path, capsys):
    code = run_cli("sweep", "--a-grid=-0.1,-0.3", "--n", N, "--out", str(tmp_path))
    assert code == 2
    assert "inadmissible" in capsys.readouterr().err


def test_sweep_single_point_matches_classify(tmp_path):
    out1 = tmp_path / "sweep"
    out2 = tmp_path / "single"
    assert run_cli("sweep", "--d", "3", "--a", "0", "--n", N,
                   "--family", "scaled_ground", "--c-grid", "0.5",
                   "--tend", "0", "--out", str(out1)) == 0
    assert run_cli("classify", "--d", "3", "--a", "0", "--n", N,
                   "--family", "scaled_ground", "--c", "0.5", "--out", str(out2)) == 0
    _, srows = read_csv(out1 / "sweep.csv")
    _, crows = read_csv(out2 / "verdict.csv")
    assert srows[0]["region"] == crows[0]["region"] == "ScatterSub"
    assert srows[0]["e_a"] == crows[0]["e_a"]


def test_sweep_partial_failure_recorded(tmp_path):
    # a negative dilation makes the cusped ground-state profile undefined;
    # the row records the failure and the sweep continues
    code = run_cli("sweep", "--d", "3", "--a=-0.1875", "--n", N,
                   "--family", "scaled_ground", "--c-grid", "0.5",
                   "--s-grid=1.0,-1.0", "--tend", "0", "--out", str(tmp_path))
    assert code == 0
    _, rows = read_csv(tmp_path / "sweep.csv")
    assert len(rows) == 2
    assert rows[0]["error"] == ""
    assert rows[1]["error"] != ""


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("d = 3\na = 0.0\nn = 2048\nfamily = scaled_ground\nc = 0.5\n")
    out = tmp_path / "out"
    code = run_cli("--config", str(cfg), "classify", "--out", str(out))
    assert code == 0
    _, rows = read_csv(out / "verdict.csv")
    assert rows[0]["region"] == "ScatterSub"
    # CLI flag overrides the config value
    out2 = tmp_path / "out2"
    code = run_cli("--config", str(cfg), "classify", "--c", "1.2", "--s", "100",
                   "--out", str(out2))
    assert code == 0
    _, rows2 = read_csv(out2 / "verdict.csv")
    assert rows2[0]["region"] == "BlowupSub"


def test_classify_field_file_roundtrip(tmp_path):
    out = tmp_path / "o1"
    assert run_cli("ground-state", "--d", "3", "--a", "0", "--n", N,
                   "--out", str(out)) == 0
    out2 = tmp_path / "o2"
    code = run_cli("classify", "--d", "3", "--a", "0", "--n", N,
                   "--field", str(out / "ground_state_field.csv"), "--out", str(out2))
    assert code == 0
    _, rows = read_csv(out2 / "verdict.csv")
    assert rows[0]["region"] == "AboveThreshold"


def test_bench_command(tmp_path):
    code = run_cli("bench", "--n", N, "--steps", "20", "--out", str(tmp_path))
    assert code == 0
    schema, rows = read_csv(tmp_path / "bench.csv")
    assert "bench" in schema
    backends = {r["backend"] for r in rows}
    assert "python" in backends


def test_entry_point_installed():
    proc = subprocess.run([sys.executable, "-m", "cnlslab.cli", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    for sub in ("ground-state", "classify", "evolve", "sweep", "self-test", "bench"):
        assert sub in proc.stdout

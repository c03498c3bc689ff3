"""End-to-end tests of the command line interface: exit codes, file
outputs, determinism, and config validation."""

import json
import math
import subprocess
import sys

import pytest

from stlct_phase.cli import main

SIGMA = 1.0 / math.sqrt(2.0 * math.pi)


def write_config(path, **overrides):
    cfg = {
        "signal": {"n0": 4, "amplitude": 1.0, "seed": 3, "beta": 1.0, "sigma": SIGMA},
        "lct": {"a": 2.0, "b": 3.0, "c": 1.0, "d": 2.0},
        "lattice": {"N": 11, "H": 190, "h": 0.125},
        "noise": {"delta": 0.0},
        "algorithm": {"s": 2.0, "r": 1.0, "gamma_tilde": 0.02},
        "evaluation": {"grid_density": 16},
    }
    for key, value in overrides.items():
        if value is None:
            cfg.pop(key, None)
        else:
            cfg[key] = value
    path.write_text(json.dumps(cfg))
    return path


def test_simulate_reconstruct_bounds_chain(tmp_path):
    cfg = write_config(tmp_path / "cfg.json")
    out = str(tmp_path / "out")
    assert main(["simulate", "--config", str(cfg), "--out", out]) == 0
    for name in ("signal.json", "measurements.txt", "simulate_report.json"):
        assert (tmp_path / "out" / name).exists()

    assert main(["reconstruct", "--config", str(cfg), "--out", out]) == 0
    for name in ("anchors.csv", "reconstruction.csv", "detector.csv", "run_report.json"):
        assert (tmp_path / "out" / name).exists()
    report = json.loads((tmp_path / "out" / "run_report.json").read_text())
    assert report["anchors_found"] >= 2
    assert report["error"]["sup_err_opt"] <= 5e-2
    # truth columns present because the config regenerates the signal
    header = (tmp_path / "out" / "reconstruction.csv").read_text().splitlines()[0]
    assert "signal_re" in header

    assert main(["bounds", "--config", str(cfg), "--out", out]) == 0
    bound = json.loads((tmp_path / "out" / "bound_report.json").read_text())
    assert bound["decay"]["certified"] is True
    assert "local_bound_at_reach" in bound
    assert bound["d_constants"]["D2"] / bound["d_constants"]["D3"] == pytest.approx(
        2.0 * math.exp(1.0 + 1.0 / SIGMA), rel=1e-12
    )


def test_experiment_and_byte_determinism(tmp_path):
    cfg = write_config(tmp_path / "cfg.json")
    out1, out2 = str(tmp_path / "a"), str(tmp_path / "b")
    assert main(["experiment", "--config", str(cfg), "--out", out1]) == 0
    assert main(["experiment", "--config", str(cfg), "--out", out2]) == 0
    for name in (
        "signal.json",
        "measurements.txt",
        "anchors.csv",
        "reconstruction.csv",
        "detector.csv",
    ):
        b1 = (tmp_path / "a" / name).read_bytes()
        b2 = (tmp_path / "b" / name).read_bytes()
        assert b1 == b2, f"{name} differs between identical runs"


def test_noise_seed_reproducibility(tmp_path):
    cfg = write_config(tmp_path / "cfg.json", noise={"delta": 1e-4, "seed": 11})
    out1, out2 = str(tmp_path / "a"), str(tmp_path / "b")
    assert main(["simulate", "--config", str(cfg), "--out", out1]) == 0
    assert main(["simulate", "--config", str(cfg), "--out", out2]) == 0
    assert (tmp_path / "a" / "measurements.txt").read_bytes() == (
        tmp_path / "b" / "measurements.txt"
    ).read_bytes()
    rep = json.loads((tmp_path / "a" / "simulate_report.json").read_text())
    assert rep["delta"] == 1e-4 and rep["eta_inf"] > 0.0


def test_config_validation_exit_code_2(tmp_path):
    out = str(tmp_path / "out")
    # unknown top-level key
    bad = tmp_path / "bad1.json"
    write_config(bad)
    doc = json.loads(bad.read_text())
    doc["mystery"] = 1
    bad.write_text(json.dumps(doc))
    assert main(["simulate", "--config", str(bad), "--out", out]) == 2
    # both lattice and tolerance routes at once
    doc = json.loads(write_config(tmp_path / "bad2.json").read_text())
    doc["epsilon"] = 1e-4
    (tmp_path / "bad2.json").write_text(json.dumps(doc))
    assert main(["simulate", "--config", str(tmp_path / "bad2.json"), "--out", out]) == 2
    # neither route
    doc = json.loads(write_config(tmp_path / "bad3.json", lattice=None).read_text())
    (tmp_path / "bad3.json").write_text(json.dumps(doc))
    assert main(["simulate", "--config", str(tmp_path / "bad3.json"), "--out", out]) == 2
    # missing config file / broken JSON
    assert main(["simulate", "--config", str(tmp_path / "nope.json"), "--out", out]) == 2
    (tmp_path / "bad4.json").write_text("{")
    assert main(["simulate", "--config", str(tmp_path / "bad4.json"), "--out", out]) == 2


def test_anchor_failure_exit_code_3(tmp_path):
    cfg = write_config(
        tmp_path / "cfg.json", algorithm={"s": 2.0, "r": 1.0, "gamma_tilde": 50.0}
    )
    out = str(tmp_path / "out")
    assert main(["simulate", "--config", str(cfg), "--out", out]) == 0
    assert main(["reconstruct", "--config", str(cfg), "--out", out]) == 3


def test_infeasible_tolerance_exit_code_4(tmp_path):
    cfg = write_config(
        tmp_path / "cfg.json",
        lattice=None,
        epsilon=0.9,
        algorithm={"s": 2.0, "r": 1.0, "gamma": 0.1},
    )
    out = str(tmp_path / "out")
    assert main(["simulate", "--config", str(cfg), "--out", out]) == 4


def test_verify_passes_and_reports(tmp_path):
    out = str(tmp_path / "out")
    assert main(["verify", "--out", out, "--suite", "theta"]) == 0
    report = json.loads((tmp_path / "out" / "verify_report.json").read_text())
    assert report["all_passed"] is True
    assert report["suites"]["theta"]["passed"] is True
    assert main(["verify", "--out", out, "--suite", "no_such_suite"]) == 2


def test_verify_detects_corrupted_dataset(tmp_path):
    cfg = write_config(tmp_path / "cfg.json")
    out = str(tmp_path / "out")
    assert main(["simulate", "--config", str(cfg), "--out", out]) == 0
    assert main(["verify", "--config", str(cfg), "--out", out, "--suite", "dataset"]) == 0
    data = tmp_path / "out" / "measurements.txt"
    lines = data.read_text().splitlines()
    n, k, v = lines[40].split(",")
    lines[40] = f"{n},{k},{float(v) + 0.25!r}"
    data.write_text("\n".join(lines) + "\n")
    assert main(["verify", "--config", str(cfg), "--out", out, "--suite", "dataset"]) == 5


def test_full_scale_gate(tmp_path):
    cfg = write_config(tmp_path / "cfg.json", lattice={"N": 400, "H": 600, "h": 0.0625})
    out = str(tmp_path / "out")
    assert main(["experiment", "--config", str(cfg), "--out", out]) == 2


def test_out_dir_from_environment(tmp_path, monkeypatch):
    cfg = write_config(tmp_path / "cfg.json")
    monkeypatch.setenv("STLCT_PHASE_OUT", str(tmp_path / "envout"))
    assert main(["simulate", "--config", str(cfg)]) == 0
    assert (tmp_path / "envout" / "measurements.txt").exists()


def test_console_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "stlct_phase.cli", "verify", "--suite", "phase", "--out", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "verify[phase]: pass" in proc.stdout

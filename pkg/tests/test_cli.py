import hashlib
import json

import numpy as np
import pytest

from detanalog import io
from detanalog.cli import EXIT_CONFIG, EXIT_IO, EXIT_NUMERICS, EXIT_OK, main

PROFILE = """\
[model]
alpha = 4.05
beta = 0.1
zeta = 1.05, 1.2
[numerics]
grid_n = 400
"""

DISPERSION = """\
[model]
alpha = 4.05
beta = 0.1
zeta = 1.05
[numerics]
grid_n = 600
ell_min = 0.5
ell_max = 0.7
n_ell = 3
box_re_max = 0.3
box_im_min = 0.3
box_im_max = 1.2
n_re = 8
n_im = 12
"""

SIMULATE = """\
[model]
alpha = 1.0
beta = 0.1
zeta = 1.2
[numerics]
grid_n = 600
[simulation]
x_left = -12
x_right = 3
width = 2
dx = 0.1
dy = 0.1
t_end = 2
[perturbation]
amplitude = 1e-3
kind = noise
[outputs]
snapshot_every = 1
lab_x0 = -12
lab_x1 = 10
n_windows = 2
"""


def run_cli(tmp_path, experiment, text, out="out", extra=()):
    cfg = tmp_path / f"{experiment}.cfg"
    cfg.write_text(text)
    status = main([experiment, "--config", str(cfg), "--out", str(tmp_path / out), *extra])
    return status, tmp_path / out


def check_manifest(out):
    manifest = json.loads((out / "manifest.json").read_text())
    for key in ("experiment", "config", "versions", "timings", "results", "artifacts", "seed"):
        assert key in manifest
    for art in manifest["artifacts"]:
        data = (out / art["path"]).read_bytes()
        assert art["size"] == len(data)
        assert art["sha256"] == hashlib.sha256(data).hexdigest()
    return manifest


def test_profile_run(tmp_path):
    status, out = run_cli(tmp_path, "profile", PROFILE)
    assert status == EXIT_OK
    manifest = check_manifest(out)
    assert len(manifest["artifacts"]) == 2
    for row in manifest["results"]["profiles"]:
        z = row["zeta"]
        assert row["u0_at_xi_min"] == pytest.approx(0.5 * (1 + np.sqrt(1 - z ** -2)), abs=1e-8)
    header, body = io.read_csv(out / manifest["artifacts"][0]["path"])
    assert header[0] == "xi" and body.shape[0] == 400


def test_profile_rerun_is_byte_identical(tmp_path):
    _, out1 = run_cli(tmp_path, "profile", PROFILE, out="a")
    _, out2 = run_cli(tmp_path, "profile", PROFILE, out="b")
    m1 = json.loads((out1 / "manifest.json").read_text())
    m2 = json.loads((out2 / "manifest.json").read_text())
    assert [a["sha256"] for a in m1["artifacts"]] == [a["sha256"] for a in m2["artifacts"]]


def test_dispersion_run(tmp_path):
    status, out = run_cli(tmp_path, "dispersion", DISPERSION)
    assert status == EXIT_OK
    manifest = check_manifest(out)
    header, body = io.read_csv(out / "dispersion.csv")
    assert header == ["alpha", "zeta", "ell", "sigma_r", "sigma_i", "residual"]
    assert body.shape == (3, 6)
    assert np.all(body[:, 3] > 0)
    assert manifest["results"]["max_sigma_r"][0] == pytest.approx(body[:, 3].max())


def test_asymptotic_run(tmp_path):
    text = "[asymptotic]\nq = 5, 10\nn = 101\n"
    status, out = run_cli(tmp_path, "asymptotic-compare", text)
    assert status == EXIT_OK
    manifest = check_manifest(out)
    assert len(manifest["results"]["closure_distances"]) == 2


def test_simulate_run(tmp_path):
    status, out = run_cli(tmp_path, "simulate", SIMULATE, extra=("--seed", "3", "--threads", "1"))
    assert status == EXIT_OK
    manifest = check_manifest(out)
    assert manifest["seed"] == 3 and manifest["config"]["run"]["seed"] == 3
    paths = {a["path"] for a in manifest["artifacts"]}
    assert {"final.bin", "centerline.csv", "trace.pgm", "cell_metrics.csv"} <= paths
    assert any(p.startswith("snapshots/") for p in paths)
    snap = io.read_snapshot(out / "final.bin")
    assert snap.t == pytest.approx(2.0)
    res = manifest["results"]
    assert abs(res["final_shock_position"] - res["initial_shock_position"]) < 0.2


def test_simulate_is_deterministic(tmp_path):
    _, out1 = run_cli(tmp_path, "simulate", SIMULATE, out="a")
    _, out2 = run_cli(tmp_path, "simulate", SIMULATE, out="b")
    for name in ("final.bin", "centerline.csv"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_config_error_exit(tmp_path, capsys):
    status, _ = run_cli(tmp_path, "profile", PROFILE.replace("zeta = 1.05, 1.2", "zeta = 0.9"))
    assert status == EXIT_CONFIG
    assert "line 4" in capsys.readouterr().err


def test_experiment_mismatch_exit(tmp_path):
    status, _ = run_cli(tmp_path, "profile", "[run]\nexperiment = dispersion\n" + PROFILE)
    assert status == EXIT_CONFIG


def test_numerics_error_exit(tmp_path):
    # zeta = 1 without allow_cj is refused by the profile integrator
    status, out = run_cli(tmp_path, "profile", PROFILE.replace("zeta = 1.05, 1.2", "zeta = 1.0"))
    assert status == EXIT_NUMERICS
    assert "numerics" in json.loads((out / "manifest.json").read_text())["status"]


def test_io_error_exits(tmp_path):
    assert main(["profile", "--config", str(tmp_path / "missing.cfg")]) == EXIT_IO
    blocker = tmp_path / "file"
    blocker.write_text("x")
    status, _ = run_cli(tmp_path, "profile", PROFILE, out="file/sub")
    assert status == EXIT_IO


def test_bad_threads_env(tmp_path, monkeypatch):
    monkeypatch.setenv("DETANALOG_THREADS", "many")
    status, _ = run_cli(tmp_path, "profile", PROFILE)
    assert status == EXIT_CONFIG

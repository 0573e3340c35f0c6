import json
import subprocess
import sys

import pytest

from dbmlab.cli import main, replicate, resolve_config, run, verify
from dbmlab.errors import ConfigurationError


def _tiny_cfg(experiment, out, **kw):
    base = {
        "semicircle": {"n": 40, "n_samples": 4},
        "rigidity": {"n": 40, "n_samples": 4},
        "gaps": {"n": 40, "n_samples": 6},
        "clt": {"n": 30, "n_samples": 120, "f": "x"},
        "loop": {"n": 30, "n_samples": 150},
        "decay": {"n": 60, "dt": 5e-3},
        "kernel-check": {"n": 60, "quad_nodes": 800},
        "homogenization": {"n": 60, "n_samples": 2},
        "repulsion": {"n": 40, "n_samples": 1200},
        "universality": {"n": 30, "n_samples": 40},
        "regularity": {"n": 60, "n_samples": 2, "n_frames": 9},
    }[experiment]
    base.update(kw)
    base["seed"] = kw.get("seed", 3)
    base["out"] = str(out)
    return resolve_config(experiment, base, {})


def test_resolve_config_validation(tmp_path):
    with pytest.raises(ConfigurationError):
        resolve_config("semicircle", {"n": 1}, {})
    with pytest.raises(ConfigurationError):
        resolve_config("nope", {}, {})
    with pytest.raises(ConfigurationError):
        resolve_config("clt", {"e": 2.5}, {})
    cfg = resolve_config("semicircle", {"n": 50}, {"seed": 9})
    assert cfg["n"] == 50 and cfg["seed"] == 9 and cfg["experiment"] == "semicircle"


def test_run_writes_artifacts(tmp_path):
    cfg = _tiny_cfg("semicircle", tmp_path / "run")
    status = run(cfg)
    assert status == 0
    out = tmp_path / "run"
    summary = json.loads((out / "summary.json").read_text())
    assert 0 <= summary["mean_ks"] <= 1
    manifest = json.loads((out / "manifest.json").read_text())
    assert set(manifest["artifacts"]) == {"summary.json", "rows.csv"}
    rows = (out / "rows.csv").read_text().strip().splitlines()
    assert rows[0].startswith("replica")
    assert len(rows) == 5


def test_run_deterministic(tmp_path):
    cfg1 = _tiny_cfg("clt", tmp_path / "a")
    run(cfg1)
    cfg2 = _tiny_cfg("clt", tmp_path / "b")
    run(cfg2)
    a = (tmp_path / "a" / "summary.json").read_bytes()
    b = (tmp_path / "b" / "summary.json").read_bytes()
    assert a == b


def test_replicate_worker_invariance(tmp_path):
    cfg = _tiny_cfg("loop", tmp_path / "w")
    rows1, summary1 = replicate(cfg, 1)
    rows2, summary2 = replicate(dict(cfg, workers=2), 2)
    assert json.dumps(summary1, sort_keys=True) == json.dumps(summary2, sort_keys=True)
    assert rows1 == rows2


def test_verify_detects_tampering(tmp_path):
    cfg = _tiny_cfg("semicircle", tmp_path / "v")
    run(cfg)
    assert verify(tmp_path / "v") == 0
    (tmp_path / "v" / "summary.json").write_text("{}\n")
    assert verify(tmp_path / "v") == 1


def test_cli_main_and_overrides(tmp_path):
    cfg_file = tmp_path / "cfg.json"
    cfg_file.write_text(json.dumps({"n": 40, "n_samples": 3, "seed": 5}))
    status = main([
        "semicircle", "--config", str(cfg_file), "--out", str(tmp_path / "m"),
        "--samples", "4",
    ])
    assert status == 0
    manifest = json.loads((tmp_path / "m" / "manifest.json").read_text())
    assert manifest["config"]["n_samples"] == 4  # flag overrides file


def test_cli_entrypoint_subprocess(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "dbmlab.cli", "semicircle", "--n", "40",
         "--samples", "3", "--seed", "2", "--out", str(tmp_path / "s")],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "s" / "summary.json").exists()


def test_gaps_histogram_csv(tmp_path):
    cfg = _tiny_cfg("gaps", tmp_path / "g")
    run(cfg)
    hist = (tmp_path / "g" / "hist.csv").read_text().strip().splitlines()
    assert hist[0] == "bin_left,bin_right,mass"
    total = sum(float(r.split(",")[2]) for r in hist[1:])
    assert total == pytest.approx(1.0, abs=1e-9)
    manifest = json.loads((tmp_path / "g" / "manifest.json").read_text())
    assert "hist.csv" in manifest["artifacts"]


def test_clt_lambda_csv(tmp_path):
    cfg = _tiny_cfg("clt", tmp_path / "c")
    run(cfg)
    lam = (tmp_path / "c" / "lambda.csv").read_text().strip().splitlines()
    assert lam[0] == "lambda,z_abs_err,z_stderr"
    assert len(lam) == 3  # default grid 0.5, 1.0


def test_repulsion_dbm_path_sensitivity(tmp_path):
    cfg = _tiny_cfg("repulsion", tmp_path / "r", path="dbm", t_flow=0.05,
                    n_samples=120, dt_scale=0.4, eps_grid=[0.5, 1.0, 2.0])
    rows, summary = replicate(cfg, 1)
    assert "slope_dt_half" in summary  # dt-sensitivity row present
    assert summary["path"] == "dbm"


def test_assert_mode_failure(tmp_path):
    # a deliberately hopeless threshold run: universality of two very
    # different ensembles at t=0 with a sharp observable is not asserted,
    # so force failure via the rigidity gate with an impossible xi instead
    cfg = _tiny_cfg("rigidity", tmp_path / "f", xi=1e-9)
    status = run(cfg, assert_mode=True)
    assert status == 1

import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from wedgecmc.config import loads_config
from wedgecmc.report import canonical_json, validate_report
from wedgecmc.sweep import run_sweep

FAST = """
[model]
n = 2

[segment.CL]
kind = collar
width = 3.0
volume = 2.0

[segment.W1]
kind = wedge
width = 1.0
volume = 2.0

[segment.CR]
kind = collar
width = 3.0
volume = 2.0

[solver]
resolution = 24
points_per_unit = 16.0

[ladder]
lambdas = 10 30 90 270

[classes]
single = W1
ring = winding:1

[diagnostics]
conformal = false

[output]
directory = {out}
emit = all

[seed]
value = 0
"""


def write_cfg(tmp_path, name="run.cfg", out="out"):
    p = tmp_path / name
    p.write_text(FAST.format(out=tmp_path / out))
    return p


@pytest.fixture(scope="module")
def sweep_result(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("sweep")
    cfg = loads_config(FAST.format(out=tmp / "out"))
    code, summary, paths = run_sweep(cfg)
    return code, summary, paths, tmp


def test_sweep_exit_code_and_sections(sweep_result):
    code, summary, paths, _ = sweep_result
    assert code == 0
    assert all(s["converged"] for s in summary["solves"])
    assert summary["model_caveats"]
    assert "scaled_vol_wedges" in summary["fits"]
    # the quick ladder is too shallow for the 1% spectra gate, but the
    # structural results must be present and decreasing
    assert summary["spectra"]["deviation_decreasing"]
    assert summary["spectra"]["tree_values"] == {"single": 1.0, "ring": 0.0}
    assert summary["checks"]["barrier_violations"] == 0
    assert summary["checks"]["convexity_ok"]
    assert summary["checks"]["distance_methods"]["agree"]


def test_summary_validates_against_schema(sweep_result):
    _, summary, paths, _ = sweep_result
    assert validate_report(summary) == []
    jpath = [p for p in paths if p.endswith("summary.json")][0]
    with open(jpath) as fh:
        loaded = json.load(fh)
    assert validate_report(loaded) == []


def test_caveat_block_always_present(sweep_result):
    _, summary, _, _ = sweep_result
    assert any("truncated" in c or "periodic" in c for c in summary["model_caveats"])


def test_csv_headers_documented(sweep_result):
    _, _, paths, _ = sweep_result
    headers = {}
    for p in paths:
        if p.endswith(".csv"):
            with open(p) as fh:
                headers[Path(p).name] = fh.readline().strip()
    assert headers["volumes.csv"].startswith("lambda,vol_W1,vol_off,vol_total,scaled_vol")
    assert headers["energy.csv"].startswith("lambda,tau,energy")
    assert headers["spectra.csv"] == "lambda,class,leaf_length,tree_length,deviation"
    assert headers["kasner.csv"] == "lambda,sup_dev,sup_d1,sup_d2"
    assert headers["distances.csv"].startswith("lambda,wedge,full_crossing")


def test_series_files_two_column(sweep_result):
    _, _, paths, _ = sweep_result
    series = [p for p in paths if "/series/" in p]
    assert series
    for p in series:
        for line in open(p):
            assert len(line.split()) == 2


def test_byte_identical_reruns(tmp_path):
    cfg = loads_config(FAST.format(out=tmp_path / "o"))
    _, _, paths1 = run_sweep(cfg, out_dir=str(tmp_path / "r1"))
    _, _, paths2 = run_sweep(cfg, out_dir=str(tmp_path / "r2"))
    assert [Path(p).name for p in paths1] == [Path(p).name for p in paths2]
    for p1, p2 in zip(sorted(paths1), sorted(paths2)):
        assert open(p1, "rb").read() == open(p2, "rb").read()


def test_jobs_do_not_change_output(tmp_path):
    cfg = loads_config(FAST.format(out=tmp_path / "o"))
    _, _, paths1 = run_sweep(cfg, out_dir=str(tmp_path / "j1"), jobs=1)
    _, _, paths2 = run_sweep(cfg, out_dir=str(tmp_path / "j3"), jobs=3)
    for p1, p2 in zip(sorted(paths1), sorted(paths2)):
        assert open(p1, "rb").read() == open(p2, "rb").read()


def test_canonical_json_float_format():
    text = canonical_json({"x": 0.1, "y": [1.0, 2.5e-17], "z": True})
    assert "0.10000000000000001" in text
    assert text.endswith("\n")


def _run_cli(args, env_extra=None):
    import wedgecmc

    env = dict(os.environ)
    env["PYTHONPATH"] = str(Path(wedgecmc.__file__).resolve().parents[1])
    env.update(env_extra or {})
    return subprocess.run(
        [sys.executable, "-m", "wedgecmc", *args],
        capture_output=True,
        text=True,
        env=env,
    )


def test_cli_exit_0_and_outputs(tmp_path):
    cfg = write_cfg(tmp_path)
    out = tmp_path / "cli_out"
    res = _run_cli(["--config", str(cfg), "--out", str(out)])
    assert res.returncode == 0, res.stderr
    assert (out / "summary.json").exists()
    assert (out / "volumes.csv").exists()


def test_cli_exit_3_on_bad_config(tmp_path):
    p = tmp_path / "bad.cfg"
    p.write_text("[model]\nn = 1\n")
    res = _run_cli(["--config", str(p)])
    assert res.returncode == 3
    assert "config error" in res.stderr


def test_cli_exit_2_on_unreachable_tolerance(tmp_path):
    cfg = write_cfg(tmp_path)
    out = tmp_path / "fail_out"
    res = _run_cli(
        ["--config", str(cfg), "--out", str(out), "--tol", "1e-30", "--ladder", "10:3:4"]
    )
    assert res.returncode == 2
    with open(out / "summary.json") as fh:
        summary = json.load(fh)
    assert summary["exit_code"] == 2
    assert any(not s["converged"] and "error" in s for s in summary["solves"])


def test_cli_env_var_output_dir(tmp_path):
    cfg = write_cfg(tmp_path)
    out = tmp_path / "env_out"
    res = _run_cli(["--config", str(cfg)], env_extra={"WEDGECMC_OUT": str(out)})
    assert res.returncode == 0, res.stderr
    assert (out / "summary.json").exists()


def test_cli_emit_json_only(tmp_path):
    cfg = write_cfg(tmp_path)
    out = tmp_path / "json_out"
    res = _run_cli(["--config", str(cfg), "--out", str(out), "--emit", "json"])
    assert res.returncode == 0
    assert (out / "summary.json").exists()
    assert not (out / "volumes.csv").exists()


def test_cli_ladder_override(tmp_path):
    cfg = write_cfg(tmp_path)
    out = tmp_path / "lad_out"
    res = _run_cli(["--config", str(cfg), "--out", str(out), "--ladder", "5:2:4"])
    assert res.returncode == 0
    with open(out / "summary.json") as fh:
        summary = json.load(fh)
    assert summary["ladder"] == [5.0, 10.0, 20.0, 40.0]

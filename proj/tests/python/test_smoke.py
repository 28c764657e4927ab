"""Smoke tests for the python bindings: a tiny end-to-end run, determinism of
the artifact bytes, the invariant battery, and error mapping."""

import json
import os
from pathlib import Path

import pytest

import riskmin

CONFIG_DIR = Path(os.environ.get("RISKMIN_CONFIG_DIR", "configs"))
SMOKE = CONFIG_DIR / "smoke.json"


def test_version_is_nonempty():
    assert riskmin.version()
    assert riskmin.__version__ == riskmin.version()


def test_full_run_writes_artifacts(tmp_path):
    out = tmp_path / "out"
    result = riskmin.run_file(SMOKE, output_dir=str(out))
    assert result["exit_code"] == 0
    assert result["output_dir"] == str(out)
    for name in ("report.json", "diagnostics.json", "manifest.json",
                 "xva_metrics.csv", "bsde_summary.csv", "xva_profile.csv",
                 "cost_fan.csv", "strategy_sample.csv"):
        assert (out / name).is_file(), name
    report = json.loads((out / "report.json").read_text())
    assert report["config_hash"] == result["config_hash"]
    assert result["total"] == pytest.approx(report["values"]["total"]["estimate"])
    assert abs(result["gap"]) <= max(3.0 * result["gap_se"], 1e-8 * (1.0 + abs(result["total"])))


def test_runs_are_deterministic(tmp_path):
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    first = riskmin.run_file(SMOKE, output_dir=str(out_a), no_cache=True)
    second = riskmin.run_file(SMOKE, output_dir=str(out_b), no_cache=True)
    assert first["total"] == second["total"]
    assert (out_a / "report.json").read_bytes() == (out_b / "report.json").read_bytes()


def test_overrides_change_the_hash(tmp_path):
    doc = SMOKE.read_text()
    base = riskmin.config_hash(doc)
    assert base == riskmin.config_hash(doc, {"threads": 3, "output_dir": "elsewhere"})
    assert base != riskmin.config_hash(doc, {"seed": 99})


def test_diagnose_reports_invariants(tmp_path):
    result = riskmin.run_file(SMOKE, stage="diagnose", output_dir=str(tmp_path / "diag"))
    assert result["exit_code"] == 0
    names = {inv["name"] for inv in result["invariants"]}
    assert "decomposition_gap" in names
    assert all(inv["pass"] for inv in result["invariants"])


def test_config_errors_surface_as_value_error(tmp_path):
    with pytest.raises(ValueError, match="not valid JSON"):
        riskmin.run("{ nope")
    bad = json.loads(SMOKE.read_text())
    bad["grid"]["steps"] = -4
    with pytest.raises(ValueError, match="/grid/steps"):
        riskmin.run(json.dumps(bad), "all", {"output_dir": str(tmp_path / "x")})
    with pytest.raises(ValueError, match="unknown override"):
        riskmin.run_file(SMOKE, banana=1)

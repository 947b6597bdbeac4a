import json
import math

import numpy as np
import pytest

from vwave import cli
from vwave.cli import BracketError, hunt_blowup, main, run
from vwave.config import Analysis, ConfigError, RunConfig, preset
from vwave.io import read_csv


def small(name, tmp_path, **kw):
    return preset(name, out=str(tmp_path), **kw)


def test_zero_data(tmp_path):
    s = run(small("zero", tmp_path))
    assert s.exit_status == 0
    g = read_csv(tmp_path / "grid_conservative.csv")
    assert list(g) == ["X", "Y", "u", "w", "z", "p", "q", "x", "t", "theta"]
    assert s.singularities == []
    assert all(e == 0 for e in s.energy["conservative"]["E"])


def test_dalembert_block(tmp_path):
    cfg = small("dalembert", tmp_path, analysis=Analysis(oracle=True, asymptotics=False))
    s = run(cfg)
    assert s.exit_status == 0
    assert s.oracle["kind"] == "dalembert" and s.oracle["max_error"] < 1e-3


def test_oracle_needs_constant_speed(tmp_path):
    s = run(small("zero", tmp_path, analysis=Analysis(oracle=True)))
    assert s.exit_status == 1 and "oracle" in s.message


def test_comparison_needs_both_modes(tmp_path):
    cfg = small("zero", tmp_path, analysis=Analysis(comparison=True))
    s = run(cfg)
    assert s.exit_status == 1
    assert "analysis.comparison" in s.message and "mode" in s.message


@pytest.mark.parametrize("patch,msg", [
    ({"h": -1.0}, "h"), ({"x_min": 3.0, "x_max": 1.0}, "x_min"), ({"T": 0.0}, "T"),
    ({"mode": "weird"}, "mode"),
    ({"wave_speed": {"family": "sinusoidal", "params": [1.0, 2.0]}}, "wave_speed"),
])
def test_validation(tmp_path, patch, msg):
    cfg = small("zero", tmp_path).with_(**patch)
    s = run(cfg)
    assert s.exit_status == 1 and msg in s.message


def test_unknown_fields():
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"bogus": 1})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"analysis": {"bogus": True}})


def test_numeric_failure_exit(tmp_path, monkeypatch):
    def boom(*a, **k):
        raise cli.NumericError("overflow", (3, 4))
    monkeypatch.setattr(cli, "integrate_goursat", boom)
    s = run(small("zero", tmp_path))
    assert s.exit_status == 2
    assert (tmp_path / "summary.json").exists()


def test_blowup_run_outputs(tmp_path):
    cfg = preset("blowup", out=str(tmp_path), h=0.01, mode="both", profile_times=[0.5],
                 analysis=Analysis(comparison=True, write_grid=False))
    s = run(cfg)
    assert s.exit_status == 0
    types = {d["id"]: d["type"] for d in s.singularities}
    assert types["w-first"] == 2 and types["w-type1"] == 1
    assert {f["law"] for f in s.fit_reports} >= {"T2", "es5", "dx12", "T1"}
    assert s.comparison is not None
    # every referenced file exists and parses
    for name in s.files:
        path = tmp_path / name
        assert path.exists(), name
        if name.endswith(".json"):
            json.loads(path.read_text())
        else:
            assert len(read_csv(path)) >= 4
    assert "profile_t0.5_dissipative.csv" in s.files and "grid_dissipative.csv" not in s.files
    fits = json.loads((tmp_path / "fits.json").read_text())
    row = next(f for f in fits if f["law"] == "T2")
    assert set(row) >= {"point_id", "law", "paper_exponent", "fitted_exponent",
                        "predicted_coefficient", "fitted_coefficient", "r2", "window"}


def test_deterministic_outputs(tmp_path):
    outs = []
    d = tmp_path / "r"
    for k in range(2):
        run(preset("blowup", out=str(d), h=0.04, profile_times=[0.8], T=1.4))
        outs.append({p.name: p.read_bytes() for p in sorted(d.iterdir())})
    assert outs[0].keys() == outs[1].keys()
    for name in outs[0]:
        assert outs[0][name] == outs[1][name], name


def test_main_with_config_file(tmp_path, capsys):
    cfg = small("zero", tmp_path / "a").to_dict()
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg))
    assert main([str(path), "--out", str(tmp_path / "b"), "--h", "0.05"]) == 0
    summ = json.loads((tmp_path / "b" / "summary.json").read_text())
    assert summ["config"]["h"] == 0.05
    assert main([str(path), "--mode", "conservative", "--out", str(tmp_path / "c")]) == 0
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main([str(bad)]) == 1
    cfg["analysis"]["comparison"] = True
    path.write_text(json.dumps(cfg))
    assert main([str(path)]) == 1
    assert "analysis.comparison" in capsys.readouterr().err


def test_hunt(tmp_path):
    tpl = preset("blowup", out=str(tmp_path))
    r = hunt_blowup(tpl, 0.0, 2.0, h=0.04)
    assert 0.2 * tpl.T <= r.t0 <= 0.8 * tpl.T and r.converged and r.steps <= 20
    assert 0 < r.amplitude <= 2.0
    assert r.config.h == tpl.h
    r2 = hunt_blowup(tpl, 0.9, 0.9, h=0.04)
    assert r2.amplitude == 0.9 and r2.t0 is not None
    with pytest.raises(BracketError):
        hunt_blowup(tpl, 0.0, 0.1, h=0.04)


def test_main_hunt(tmp_path):
    assert main(["blowup", "--hunt", "0", "0.1", "--h", "0.04", "--out", str(tmp_path)]) == 1

from __future__ import annotations

import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from ptrg.cli import bundled_configs, couplings_export, dumps, fmt, forbid_randomness, main, run, to_jsonable
from ptrg.config import ConfigError, parse_config

FIG2 = {
    "model": {
        "kind": "xyz", "N": 4, "epsilon": [0.1, 0.3, 0.5, 0.7], "g": 0.1,
        "alpha_x": 1, "alpha_y": 1, "beta_x": 0.5, "beta_y": 0.5,
        "delta": {"re": 0.0, "im": 0.5}, "lambda": {"re": 0.0, "im": 0.5},
    },
    "task": {"type": "spectrum"},
}


def write(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return path


def test_bundled_list():
    names = bundled_configs()
    for expected in ("fig2.json", "fig3a.json", "fig3f.json", "couplings.json", "bethe.json", "perturb.json"):
        assert expected in names


def test_fig2_spectrum(tmp_path, capsys):
    assert run(write(tmp_path, FIG2), tmp_path / "out") == 0
    rows = list(csv.reader((tmp_path / "out" / "spectrum.csv").open()))
    assert rows[0] == ["charge_index", "eig_index", "re", "im", "tag", "partner"]
    assert len(rows) == 1 + 4 * 16
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert summary["status"] == "ok" and summary["exit_code"] == 0
    assert "wall time" in capsys.readouterr().err


def test_duplicate_epsilon_exit_2(tmp_path, capsys):
    cfg = json.loads(json.dumps(FIG2))
    cfg["model"]["epsilon"] = [0.1, 0.1, 0.5, 0.7]
    assert run(write(tmp_path, cfg), tmp_path / "out") == 2
    assert "epsilon entries must be distinct" in capsys.readouterr().err


@pytest.mark.parametrize("mutate", [
    lambda c: c["model"].update(unknown=1),
    lambda c: c["task"].update(type="nope"),
    lambda c: c["model"].update(N=3),
    lambda c: c["model"].update(beta_x=-0.5),
])
def test_invalid_configs_exit_2(tmp_path, mutate):
    cfg = json.loads(json.dumps(FIG2))
    mutate(cfg)
    assert run(write(tmp_path, cfg), tmp_path / "out") == 2


def test_unreadable_config_exit_2(tmp_path):
    assert run(tmp_path / "missing.json") == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(bad) == 2


def test_lindblad_on_non_hermitian_model_exit_2(tmp_path):
    cfg = json.loads(json.dumps(FIG2))
    cfg["task"] = {"type": "lindblad", "t_max": 1.0, "sample_dt": 0.5, "gamma": 0.05, "initial": "0000"}
    assert run(write(tmp_path, cfg), tmp_path / "out") == 2


def test_numerical_failure_exit_3(tmp_path):
    cfg = json.loads(json.dumps(FIG2))
    cfg["model"]["g"] = 0.0
    cfg["model"]["bz"] = "epsilon"
    # scales far beyond the perturbative regime make levels cross
    cfg["task"] = {"type": "perturb", "inner": "cpt", "scales": [0.1, 1.0, 3.0, 10.0]}
    assert run(write(tmp_path, cfg), tmp_path / "out") == 3
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert summary["status"] == "numerical_failure"
    assert "TrackingLost" in summary["error"]


def test_couplings_export_rows():
    rows = {(fam, d): (gx, gz) for fam, d, gx, gz, _ in couplings_export([0.5, np.pi / 2, 20.0])}
    assert rows["rational", 0.5] == pytest.approx((2.0, 2.0))
    gx, gz = rows["trigonometric", np.pi / 2]
    assert gx == pytest.approx(1.0) and abs(gz) < 1e-15
    assert abs(rows["hyperbolic", 20.0][1] - 1) < 1e-3
    with pytest.raises(ConfigError):
        couplings_export([np.pi + 1e-8])
    with pytest.raises(ConfigError):
        couplings_export([0.0])


def test_json_encoding():
    assert to_jsonable(1 + 2j) == {"re": 1.0, "im": 2.0}
    assert to_jsonable(np.array([np.nan, 1.0])) == [None, 1.0]
    assert to_jsonable({"a": np.int64(3), "b": np.bool_(True)}) == {"a": 3, "b": True}
    text = dumps({"b": 1, "a": [0.1, 1j]})
    assert dumps(json.loads(text)) == text
    assert fmt(0.1) == "0.10000000000000001"


def test_summary_round_trips(tmp_path):
    out = tmp_path / "out"
    assert run("bundled:bethe", out) == 0
    text = (out / "summary.json").read_text()
    assert dumps(json.loads(text)) == text
    result = json.loads((out / "bethe.json").read_text())
    assert result["residual"] <= 1e-10 and result["overlap"] > 1 - 1e-8


def test_repeated_runs_are_byte_identical(tmp_path):
    for k in (1, 2):
        assert run("bundled:perturb", tmp_path / f"r{k}") == 0
    for name in ("perturb.csv", "summary.json"):
        assert (tmp_path / "r1" / name).read_bytes() == (tmp_path / "r2" / name).read_bytes()


def test_threads_do_not_change_output(tmp_path):
    assert run(write(tmp_path, FIG2), tmp_path / "a", threads=1) == 0
    assert run(write(tmp_path, FIG2), tmp_path / "b", threads=4) == 0
    a = (tmp_path / "a" / "spectrum.csv").read_bytes()
    assert a == (tmp_path / "b" / "spectrum.csv").read_bytes()


def test_seedless_guard():
    with forbid_randomness():
        with pytest.raises(RuntimeError):
            np.random.default_rng(1)
    np.random.default_rng(1)


def test_seedless_run(tmp_path):
    assert main(["--config", "bundled:fig2", "--out", str(tmp_path / "o"), "--seedless"]) == 0


def test_parser_errors(capsys):
    assert main([]) == 2
    assert main(["--config", "bundled:fig2", "--threads", "0"]) == 2
    assert main(["--list-bundled"]) == 0
    assert "fig2.json" in capsys.readouterr().out


def test_parse_config_fields():
    cfg = parse_config(FIG2)
    cs = cfg.couplings()
    assert cs.Bx[0] == pytest.approx(0.5j / np.sqrt(0.6))
    assert cfg.task == "spectrum"


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "ptrg", "--config", "bundled:couplings", "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    rows = list(csv.reader((tmp_path / "couplings.csv").open()))
    assert rows[0] == ["family", "d", "gamma_x", "gamma_z", "nearest_pole"]
    assert ["rational", "0.5", "2", "2", "0"] in rows

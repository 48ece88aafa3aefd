from __future__ import annotations

import csv
import json
import xml.etree.ElementTree as ET
from argparse import Namespace
from pathlib import Path

import numpy as np
import pytest

from conftest import TABLE_ROWS
from vortex_holonomy.cli import EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, THREADS_ENV, load_config, main

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def write_cfg(tmp_path: Path, payload: dict, name: str = "run.json") -> str:
    payload = dict(payload)
    payload.setdefault("output", {})
    payload["output"] = {"dir": str(tmp_path / "out"), **payload["output"]}
    p = tmp_path / name
    p.write_text(json.dumps(payload))
    return str(p)


def read_rows(path: Path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


TWO_VORTEX = {
    "problem": "three",
    "strengths": [1.0, 1.0],
    "initial": {"positions": [[1.0, 0.0], [-1.0, 0.0]]},
    "simulate": {"t_end": 2.0, "n_samples": 11},
}


def test_missing_file_and_bad_json(tmp_path, capsys):
    assert main(["phases", str(tmp_path / "nope.json")]) == EXIT_CONFIG
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["phases", str(bad)]) == EXIT_CONFIG
    assert "bad.json" in capsys.readouterr().err


@pytest.mark.parametrize("payload", [
    {"problem": "five", "strengths": [1, 1, 1]},
    {"problem": "three", "strengths": [1, 0, 1]},
    {"problem": "three", "strengths": [1, 1, 1], "colour": "red"},
    {"problem": "three", "strengths": [1, 1, 1, 1], "mu": 1},
    {"problem": "three", "strengths": [1, 1, 1], "initial": {"positions": [[0, 0], [1, 0]]}},
])
def test_schema_violations_exit_2(tmp_path, payload):
    assert main(["phases", write_cfg(tmp_path, payload)]) == EXIT_CONFIG


def test_out_of_domain_input_exit_2(tmp_path):
    cfg = write_cfg(tmp_path, {"problem": "three", "strengths": [7.615, -3.46, -3.155], "mu": -1.0,
                               "energies": [-10.0]})
    assert main(["phases", cfg]) == EXIT_CONFIG


def test_collapse_exits_3_with_last_time(tmp_path, capsys):
    cfg = write_cfg(tmp_path, {
        "problem": "three",
        "strengths": [2.0, 2.0, -1.0],
        "initial": {"positions": [[-1.0, 0.0], [1.0, 0.0], [1.0, np.sqrt(2.0)]]},
        "simulate": {"t_end": 20.0},
    })
    assert main(["simulate", cfg]) == EXIT_NUMERIC
    err = capsys.readouterr().err
    assert "last valid time" in err
    t_last = float(err.split("t=")[-1].strip())
    assert 13.0 < t_last < 13.5


def test_overrides(tmp_path):
    cfg = load_config(str(CONFIGS / "table_case.json"),
                      Namespace(mu=2.0, energy=[-1.5, -2.5], tol=1e-8, out=str(tmp_path)), "phases")
    assert cfg["mu"] == 2.0 and cfg["energies"] == [-1.5, -2.5]
    assert cfg["integrator"] == {"rel_tol": 1e-8, "abs_tol": 1e-10}
    assert cfg["output"]["dir"] == str(tmp_path)


def test_two_vortex_simulate_is_deterministic(tmp_path):
    cfg = write_cfg(tmp_path, TWO_VORTEX)
    assert main(["simulate", cfg]) == EXIT_OK
    out = tmp_path / "out"
    first = {p.name: p.read_bytes() for p in out.iterdir()}
    assert set(first) == {"simulate.csv", "simulate_summary.json", "simulate.svg"}
    rows = read_rows(out / "simulate.csv")
    t = float(rows[-1]["t"])
    x1, y1 = float(rows[-1]["x1"]), float(rows[-1]["y1"])
    omega = 1.0 / (4 * np.pi)
    assert (x1, y1) == pytest.approx((np.cos(omega * t), np.sin(omega * t)), abs=1e-9)
    assert main(["simulate", cfg]) == EXIT_OK
    assert {p.name: p.read_bytes() for p in out.iterdir()} == first


def test_empty_portrait_grid_gives_valid_svg(tmp_path):
    cfg = write_cfg(tmp_path, {"problem": "three", "strengths": [7.615, -3.46, -3.155], "mu": 1.0,
                               "portrait": {"n_phi": 0, "n_I": 0}})
    assert main(["portrait", cfg]) == EXIT_OK
    ET.parse(tmp_path / "out" / "portrait.svg")
    assert read_rows(tmp_path / "out" / "portrait.csv") == []


def test_portrait_on_hyperboloid(tmp_path):
    cfg = write_cfg(tmp_path, {"problem": "three", "strengths": [-1.0, -1.0, 1.0], "mu": 1.0,
                               "portrait": {"n_phi": 3, "n_I": 3, "t_end": 1.0, "n_samples": 50,
                                            "view": "surface"}})
    assert main(["portrait", cfg]) == EXIT_OK
    ET.parse(tmp_path / "out" / "portrait.svg")
    rows = read_rows(tmp_path / "out" / "portrait.csv")
    assert rows and all(float(r["I1"]) < -1.0 + 1e-9 or float(r["I1"]) > 1.0 - 1e-9 for r in rows)


@pytest.mark.slow
def test_table_phases_run(tmp_path, capsys):
    assert main(["phases", str(CONFIGS / "table_case.json"), "--out", str(tmp_path)]) == EXIT_OK
    rows = read_rows(tmp_path / "table_case_phases.csv")
    assert capsys.readouterr().out.splitlines()[0].startswith("orbit_id,energy")
    for label, (energy, theta_g, period, theta_d, theta_tot) in TABLE_ROWS.items():
        cands = [r for r in rows if float(r["energy"]) == energy and r["status"] == "ok"]
        best = min(cands, key=lambda r: abs(float(r["period"]) - period))
        assert float(best["period"]) == pytest.approx(period, rel=5e-3), label
        assert float(best["theta_d"]) == pytest.approx(theta_d, abs=2e-3), label
        assert float(best["theta_tot"]) == pytest.approx(theta_tot, abs=2e-3), label
    payload = json.loads((tmp_path / "table_case_phases.json").read_text())
    assert payload["columns"][0] == "orbit_id" and len(payload["rows"]) == len(rows)
    ET.parse(tmp_path / "table_case_phases.svg")


def test_worker_count_does_not_change_output(tmp_path, monkeypatch):
    outputs = []
    for workers in ("1", "2"):
        monkeypatch.setenv(THREADS_ENV, workers)
        out = tmp_path / workers
        assert main(["phases", str(CONFIGS / "table_case.json"), "--out", str(out),
                     "--energy", "-10.1509", "--energy", "-7.45"]) == EXIT_OK
        outputs.append((out / "table_case_phases.csv").read_bytes())
    assert outputs[0] == outputs[1]


def test_four_vortex_phases_row(tmp_path):
    assert main(["phases", str(CONFIGS / "parallelogram.json"), "--out", str(tmp_path)]) == EXIT_OK
    (row,) = read_rows(tmp_path / "parallelogram_phases.csv")
    assert row["status"] == "ok"
    g, d, tot = float(row["theta_g"]), float(row["theta_d"]), float(row["theta_tot"])
    assert abs(np.angle(np.exp(1j * (g + d - tot)))) < 1e-6
    assert tot == pytest.approx(0.35644, abs=1e-4)


def test_ap_period_cross_check(tmp_path):
    assert main(["ap-period", str(CONFIGS / "identical_three.json"), "--out", str(tmp_path)]) == EXIT_OK
    (row,) = read_rows(tmp_path / "identical_three_ap-period.csv")
    assert row["branch"] == "b" and int(row["multiple"]) == 3
    assert float(row["orbit_period"]) == pytest.approx(3 * float(row["ap_period"]), rel=1e-7)
    ET.parse(tmp_path / "identical_three_ap-period.svg")


def test_ap_period_requires_identical(tmp_path):
    cfg = write_cfg(tmp_path, {"problem": "three", "strengths": [1.0, 2.0, 1.0],
                               "initial": {"positions": [[1, 0], [0, 1], [-1, -0.5]]}})
    assert main(["ap-period", cfg]) == EXIT_CONFIG

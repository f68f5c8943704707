import json
from pathlib import Path

import numpy as np
import pytest

from berrybundle.cli import main
from berrybundle.scenario import validate_scenario

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"


def _write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return path


def _run(tmp_path, scenario, monkeypatch):
    monkeypatch.chdir(tmp_path)
    out = tmp_path / "report.json"
    code = main(["run", str(scenario), "--out", str(out)])
    return code, (json.loads(out.read_text()) if out.exists() else None)


def test_spin_equator(tmp_path, monkeypatch):
    code, report = _run(tmp_path, SCENARIOS / "spin_equator.json", monkeypatch)
    assert code == 0
    hol = report["results"]["holonomy"]
    assert abs(abs(hol["ode"]["abelian_phase"]) - np.pi) <= 1e-6
    assert hol["max_difference"] <= 1e-3
    assert report["results"]["topology"]["det_winding"] == 1
    assert set(hol["ode"]["diagnostics"]) >= {"unitarity_residual", "min_gap", "steps"}
    assert set(report) == {"scenario", "model", "results", "versions", "timing"}


def test_lambda_topology(tmp_path, monkeypatch):
    code, report = _run(tmp_path, SCENARIOS / "lambda_topology.json", monkeypatch)
    assert code == 0
    topo = report["results"]["topology"]
    assert topo["det_winding"] == 0 and topo["trivializable"] is True


def test_csv_columns(tmp_path, monkeypatch):
    code, report = _run(tmp_path, SCENARIOS / "spin_equator.json", monkeypatch)
    conn = Path(report["results"]["connection_csv"]["file"]).read_text().splitlines()
    assert conn[0] == "b0,b1,b2,k,re_A00,im_A00"
    assert len(conn) == 1 + report["results"]["connection_csv"]["rows"]
    track = Path(report["results"]["track_csv"]["file"]).read_text().splitlines()
    assert track[0] == "node,b0,b1,b2,energy,gap"


def test_schema_round_trip(tmp_path, monkeypatch):
    for name in ("spin_equator.json", "lambda_topology.json", "planar_double_loop.json"):
        code, report = _run(tmp_path, SCENARIOS / name, monkeypatch)
        assert code == 0
        validate_scenario(report["scenario"])
        assert report["scenario"] == json.loads((SCENARIOS / name).read_text())


def test_determinism(tmp_path, monkeypatch):
    _, a = _run(tmp_path, SCENARIOS / "lambda_topology.json", monkeypatch)
    _, b = _run(tmp_path, SCENARIOS / "lambda_topology.json", monkeypatch)
    for r in (a, b):
        r.pop("timing")
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_malformed_json(tmp_path, monkeypatch, capsys):
    bad = _write(tmp_path, "bad.json", '{"model": ')
    code, report = _run(tmp_path, bad, monkeypatch)
    assert code == 2 and report is None
    assert not list(tmp_path.glob("*.csv"))
    assert json.loads(capsys.readouterr().err)["kind"] == "input"


@pytest.mark.parametrize(
    "scenario",
    [
        {"model": {"name": "nope"}, "branch": "1/2", "path": {"preset": "circle"}, "outputs": ["holonomy"]},
        {"model": {"name": "spin_dipole"}, "branch": "1/2", "path": {"preset": "circle"}, "outputs": []},
        {"model": {"name": "spin_dipole"}, "branch": "7", "path": {"preset": "spherical_cap", "params": {"theta": 1}}, "outputs": ["holonomy"]},
        {"model": {"name": "spin_dipole"}, "branch": "1/2", "path": {"preset": "circle"}, "outputs": ["holonomy"]},
    ],
)
def test_invalid_scenarios(tmp_path, monkeypatch, scenario):
    code, report = _run(tmp_path, _write(tmp_path, "s.json", scenario), monkeypatch)
    assert code == 2 and report is None


def test_domain_error_echoes_node(tmp_path, monkeypatch, capsys):
    sc = {"model": {"name": "planar_spin"}, "branch": 0.5, "path": {"nodes": [[-1, 0], [1, 0]]}, "outputs": ["holonomy"]}
    code, report = _run(tmp_path, _write(tmp_path, "o.json", sc), monkeypatch)
    assert code == 3 and report is None
    err = json.loads(capsys.readouterr().err)
    assert err["kind"] == "domain" and "node" in err and len(err["point"]) == 2


def test_models_listing(capsys):
    assert main(["models"]) == 0
    text = capsys.readouterr().out
    for name in ("spin_dipole", "lambda_system", "planar_spin"):
        assert name in text
    assert main(["models", "--json"]) == 0
    entries = json.loads(capsys.readouterr().out)
    assert [e["name"] for e in entries] == sorted(e["name"] for e in entries)
    assert len(entries) == 3


def test_unknown_flag():
    with pytest.raises(SystemExit) as exc:
        main(["models", "--frobnicate"])
    assert exc.value.code == 2


def test_reproduce_subset(capsys, tmp_path):
    out = tmp_path / "r.json"
    assert main(["reproduce", "--only", "3", "--json", str(out)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[-1] == "1/1 checks passed"
    assert [r["criterion"] for r in json.loads(out.read_text())] == [3]


def test_reproduce_bad_group(capsys):
    assert main(["reproduce", "--only", "everything"]) == 2


def test_reproduce_coarse_steps_fails(capsys):
    assert main(["reproduce", "--only", "1", "--steps", "4"]) == 1
    assert "FAIL" in capsys.readouterr().out

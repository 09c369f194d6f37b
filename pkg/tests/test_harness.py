import csv
import json

import pytest

from robosec import cli
from robosec.harness import (CampaignReport, CampaignSpec, aggregate, emit_report, load_report,
                             run_campaign)
from robosec.scenario import ConfigError, Scenario, builtin
from robosec.trial import TrialConfig, run_trial


def test_scenario_round_trip(tmp_path, door_rooms):
    p = tmp_path / "s.json"
    door_rooms.save(p)
    back = Scenario.load(p)
    assert back.to_dict() == door_rooms.to_dict()


@pytest.mark.parametrize("patch", [
    {"colour": "red"},
    {"robot": {"start": [37, 25, 0], "wheels": 2}},
    {"tick": 0},
    {"sensor": {"mode": "sonar"}},
    {"obstacles": [{"id": "x", "rect": [0, 0, 1, 1], "behavior": {"kind": "teleports"}}]},
    {"obstacles": [{"id": "x", "rect": [0, 0, 1, 1], "behavior": {"kind": "moves_away", "speed": 0, "start_time": 1}}]},
])
def test_scenario_rejects_bad_config(door_rooms, patch):
    with pytest.raises(ConfigError):
        Scenario.from_dict(door_rooms.to_dict() | patch)


def test_shipped_scenarios_flag_calibration():
    for name in ("door_rooms", "cabinet_room"):
        assert "approximation" in builtin(name).note
    with pytest.raises(ConfigError):
        builtin("fig99")


def test_trial_config_errors(cabinet_room):
    with pytest.raises(ConfigError):
        run_trial(cabinet_room, 0, detector="crv")
    with pytest.raises(ConfigError):
        run_trial(cabinet_room, 0, fuzzer="radamsa")
    with pytest.raises(ConfigError):
        run_trial(cabinet_room, 0, fuzzer="random")
    with pytest.raises(ConfigError):
        run_trial(cabinet_room, 0, bogus=1)
    with pytest.raises(ConfigError):
        CampaignSpec(trials=0)


def test_success_rate_is_exact():
    recs = [{"success": i < 28, "detected": False, "reaction_time": None, "crashed": False,
             "cleaned": 1.0, "running_time": 1.0} for i in range(30)]
    assert round(aggregate(recs)["success_rate"], 1) == 93.3
    recs5 = [dict(r, success=i < 5) for i, r in enumerate(recs)]
    assert round(aggregate(recs5)["success_rate"], 1) == 16.7
    assert aggregate([dict(r, success=False) for r in recs])["success_rate"] == 0


def test_campaign_reproducible_and_order_independent():
    spec = CampaignSpec("door_rooms", fuzzer="robofuzz", target="ReduceEfficacy", trials=3, seed=5)
    a = run_campaign(spec)
    b = run_campaign(spec, workers=2)
    assert a.records == b.records and a.aggregates == b.aggregates
    assert a.aggregates == a.recompute()
    assert [r["seed"] for r in a.records] == [5, 6, 7]


def test_emit_report_shapes(tmp_path):
    reports = {"robofuzz": run_campaign(CampaignSpec("door_rooms", fuzzer="robofuzz", trials=2,
                                                     record_trace=True))}
    files = emit_report(reports, tmp_path, "both", table="fuzz")
    rows = list(csv.reader((tmp_path / "fuzz.csv").open()))
    assert rows[0] == ["fuzzer", "successes", "trials", "rate_pct"]
    assert rows[1] == ["robofuzz", "2", "2", "100.0"]
    back = load_report(tmp_path / "fuzz.json")
    assert back["robofuzz"].aggregates == reports["robofuzz"].aggregates
    assert back["robofuzz"].recompute() == reports["robofuzz"].aggregates
    assert any(f.name.startswith("series_") for f in files)

    det = {"shade/fabrication": run_campaign(CampaignSpec("cabinet_room", attack="fabrication",
                                                          detector="shade", trials=2))}
    emit_report(det, tmp_path, "csv", table="detect")
    rows = list(csv.reader((tmp_path / "detect.csv").open()))
    assert rows[0] == ["method", "model", "detections", "trials", "mean_reaction_s"]
    assert rows[1][:4] == ["shade", "fabrication", "2", "2"]


def test_cli_runs_and_reports_config_errors(tmp_path, capsys):
    assert cli.main(["learn", "--out", str(tmp_path / "m.json")]) == 0
    assert json.loads((tmp_path / "m.json").read_text())["version"] == 1
    assert cli.main(["fuzz", "--fuzzer", "robofuzz", "--trials", "1", "--out", str(tmp_path)]) == 0
    assert cli.main(["detect", "--attack", "suspension", "--detectors", "crv", "--trials", "1",
                     "--map", str(tmp_path / "m.json"), "--out", str(tmp_path)]) == 0
    assert cli.main(["replay", "--scenario", "missing.json"]) != 0
    assert cli.main(["fuzz", "--scenario", "no_such_layout", "--trials", "1", "--out", str(tmp_path)]) == 2
    with pytest.raises(SystemExit) as e:
        cli.main(["fuzz", "--fuzzer", "radamsa"])
    assert e.value.code != 0

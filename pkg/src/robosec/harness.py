"""Campaign orchestration, aggregate metrics and report files."""
from __future__ import annotations

import csv
import json
import logging
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from functools import lru_cache
from pathlib import Path
from typing import Optional

from .histmap import HistoricalMap, learn
from .robofuzz import FuzzTarget
from .scenario import ConfigError, Scenario, resolve
from .shade import METHODS, ShadeConfig
from .trial import TrialConfig, TrialRecord, clean_duration, run_trial
from .world import Pose

log = logging.getLogger(__name__)


# -- historical map -------------------------------------------------------

def learn_trace(rec: TrialRecord) -> list[tuple[Pose, float]]:
    return [(Pose(*r["sensor"]), r["genuine"]) for r in rec.trace if r["genuine"] is not None]


def learn_map(scenario: Scenario, passes: int = 2, base_seed: int = 1000,
              resolution: float = 10.0) -> HistoricalMap:
    """Run ``passes`` attack-free trials and record obstacles and the clean traffic profile."""
    if passes < 1:
        raise ConfigError("learning needs at least one pass")
    recs = [run_trial(scenario, base_seed + k, TrialConfig()) for k in range(passes)]
    for r in recs:
        if r.crashed or not r.completed:
            raise ConfigError("learn run did not complete cleanly")
    cfg = ShadeConfig()
    profile = {
        "latency_ms": list(scenario.latency.genuine),
        # one status packet per second of clean operation
        "nid_baseline": cfg.nid_window * 1.0,
        "clean_cleaned": recs[0].cleaned,
        "clean_running_time": recs[0].running_time,
    }
    return learn([learn_trace(r) for r in recs], scenario.bounds, resolution,
                 provenance={"scenario": scenario.name, "seeds": [r.seed for r in recs]},
                 profile=profile)


@lru_cache(maxsize=8)
def _cached_map(name: str) -> HistoricalMap:
    return learn_map(resolve(name))


@lru_cache(maxsize=8)
def _cached_length(name: str) -> float:
    return clean_duration(resolve(name))


# -- campaigns ------------------------------------------------------------

@dataclass
class CampaignSpec:
    scenario: str = "door_rooms"
    fuzzer: Optional[str] = None
    target: str = FuzzTarget.CRASH_ROBOT.value
    attack: Optional[str] = None
    attack_distance: Optional[float] = None
    detector: Optional[str] = None
    mitigation: bool = False
    mode: Optional[str] = None  # sensor mode override: passive | proactive | periodic
    trials: int = 30
    seed: int = 0
    map_path: Optional[str] = None
    record_trace: bool = False

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.detector is not None and self.detector not in METHODS:
            raise ConfigError(f"unknown detector {self.detector!r}")
        FuzzTarget(self.target)

    def trial_seeds(self) -> list[int]:
        return [self.seed + i for i in range(self.trials)]


@dataclass
class CampaignReport:
    spec: dict
    records: list[dict]
    valid: bool = True
    error: Optional[str] = None
    aggregates: dict = field(default_factory=dict)

    def recompute(self) -> dict:
        return aggregate(self.records)


def aggregate(records: list[dict]) -> dict:
    n = len(records)
    succ = sum(1 for r in records if r["success"])
    det = [r for r in records if r["detected"]]
    reactions = [r["reaction_time"] for r in det if r["reaction_time"] is not None]
    return {
        "trials": n,
        "successes": succ,
        "success_rate": 100.0 * succ / n if n else 0.0,
        "detections": len(det),
        "mean_reaction_time": statistics.fmean(reactions) if reactions else None,
        "crashes": sum(1 for r in records if r["crashed"]),
        "mean_cleaned": statistics.fmean(r["cleaned"] for r in records) if n else 0.0,
        "mean_running_time": statistics.fmean(r["running_time"] for r in records) if n else 0.0,
    }


def _trial_config(spec: CampaignSpec, scenario: Scenario) -> TrialConfig:
    from .scenario import mode_from
    hmap = None
    if spec.mitigation or spec.detector in ("crv", "shade"):
        if spec.map_path:
            hmap = HistoricalMap.load(spec.map_path)
        else:
            hmap = _cached_map(spec.scenario) if not Path(spec.scenario).exists() else learn_map(scenario)
    trial_length = None
    if spec.fuzzer == "random":
        trial_length = _cached_length(spec.scenario) if not Path(spec.scenario).exists() \
            else clean_duration(scenario)
    return TrialConfig(
        fuzzer=spec.fuzzer,
        target=FuzzTarget(spec.target),
        attack=spec.attack,
        attack_distance=spec.attack_distance,
        detector=spec.detector,
        stop_on_detection=not spec.mitigation,
        mitigation=spec.mitigation,
        hmap=hmap,
        mode=mode_from({"mode": spec.mode}) if spec.mode else None,
        trial_length=trial_length,
        record_trace=spec.record_trace,
    )


def _one(args) -> dict:
    spec, seed = args
    scenario = resolve(spec.scenario)
    rec = run_trial(scenario, seed, _trial_config(spec, scenario))
    out = rec.summary()
    if spec.record_trace:
        out["series"] = [(r["t"], r["genuine"], r["delivered"]) for r in rec.trace]
    return out


def run_campaign(spec: CampaignSpec, workers: int = 1) -> CampaignReport:
    """Run every seed of ``spec``; aggregation does not depend on execution order."""
    jobs = [(spec, s) for s in spec.trial_seeds()]
    records: list[dict] = []
    try:
        if workers > 1:
            with ProcessPoolExecutor(workers) as pool:
                records = list(pool.map(_one, jobs))
        else:
            for job in jobs:
                records.append(_one(job))
    except ConfigError as e:
        report = CampaignReport(asdict(spec), records, valid=False, error=str(e))
        report.aggregates = aggregate(records) if records else {}
        return report
    records.sort(key=lambda r: r["seed"])
    report = CampaignReport(asdict(spec), records)
    report.aggregates = aggregate(records)
    return report


def detection_sweep(spec: CampaignSpec, distances: list[float], workers: int = 1) -> list[tuple[float, Optional[float]]]:
    """Mean reaction time per attack-start distance; unreachable distances are skipped."""
    scenario = resolve(spec.scenario)
    from .world import raycast
    world = scenario.build_world(spec.seed)
    reach = raycast(world, world.sensor_pose())
    curve = []
    for d in distances:
        if d > reach:
            log.warning("attack distance %.0f cm is beyond the first approach (%.0f cm); skipped", d, reach)
            continue
        rep = run_campaign(replace(spec, attack_distance=d), workers)
        curve.append((d, rep.aggregates["mean_reaction_time"]))
    return curve


# -- report files ---------------------------------------------------------

def _fmt_rate(x: float) -> str:
    return f"{x:.1f}"


def _fmt_time(x: Optional[float]) -> str:
    return "" if x is None else f"{x:.1f}"


def emit_report(reports: dict[str, CampaignReport], out_dir: str | Path, fmt: str = "both",
                table: str = "fuzz") -> list[Path]:
    """Write JSON (full) and/or a table-shaped CSV for a group of campaigns.

    ``reports`` maps a row label (fuzzer name, or "method/model") to its campaign.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ConfigError(f"cannot write to {out}: {e}") from None
    written = []
    if fmt in ("json", "both"):
        p = out / f"{table}.json"
        p.write_text(json.dumps({k: asdict(v) for k, v in reports.items()}, indent=1, default=str))
        written.append(p)
    if fmt in ("csv", "both"):
        p = out / f"{table}.csv"
        with p.open("w", newline="") as fh:
            w = csv.writer(fh)
            if table == "detect":
                w.writerow(["method", "model", "detections", "trials", "mean_reaction_s"])
                for label, rep in reports.items():
                    method, model = label.split("/")
                    a = rep.aggregates
                    w.writerow([method, model, a["detections"], a["trials"], _fmt_time(a["mean_reaction_time"])])
            elif table == "mitigate":
                w.writerow(["run", "cleaned_cm", "running_time_s", "distance_loss_pct", "time_gain_pct"])
                base = reports.get("clean")
                for label, rep in reports.items():
                    a = rep.aggregates
                    loss = gain = 0.0
                    if base is not None:
                        loss = 100.0 * (1 - a["mean_cleaned"] / base.aggregates["mean_cleaned"])
                        gain = 100.0 * (a["mean_running_time"] / base.aggregates["mean_running_time"] - 1)
                    w.writerow([label, f"{a['mean_cleaned']:.1f}", _fmt_time(a["mean_running_time"]),
                                _fmt_rate(loss), _fmt_rate(gain)])
            else:
                w.writerow(["fuzzer", "successes", "trials", "rate_pct"])
                for label, rep in reports.items():
                    a = rep.aggregates
                    w.writerow([label, a["successes"], a["trials"], _fmt_rate(a["success_rate"])])
        written.append(p)
    for label, rep in reports.items():
        series = [r for r in rep.records if "series" in r]
        if series:
            p = out / f"series_{label.replace('/', '_')}.csv"
            with p.open("w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["seed", "t", "genuine_cm", "delivered_cm"])
                for r in series:
                    for t, g, d in r["series"]:
                        w.writerow([r["seed"], f"{t:.1f}", g, d])
            written.append(p)
    return written


def load_report(path: str | Path) -> dict[str, CampaignReport]:
    raw = json.loads(Path(path).read_text())
    return {k: CampaignReport(**v) for k, v in raw.items()}

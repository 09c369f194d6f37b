"""One simulated trial: the per-tick loop wiring every component together."""
from __future__ import annotations

import hashlib
import json
import math
import random
from dataclasses import asdict, dataclass, field
from typing import Optional

from .attack import (AttackChannel, ConstantFuzzer, Fabrication, RandomTimeFuzzer, Suspension,
                     VolatileFuzzer)
from .controller import Controller, Phase
from .histmap import HistoricalMap
from .remit import Remit, RemitConfig
from .robofuzz import FuzzPlan, FuzzTarget, RoboFuzz, build_plan
from .scenario import ConfigError, Scenario
from .sensing import Passive, Sensor, SensorMode, deliver
from .shade import COMPOSITE, CRV, DetectionRequest, Detector, ShadeConfig
from .world import check_collision, raycast

FUZZERS = ("volatile", "random", "robofuzz", "constant")
ATTACKS = ("suspension", "fabrication")
HEARTBEAT_PERIOD = 1.0  # s, the robot's own status traffic


@dataclass
class TrialConfig:
    fuzzer: Optional[str] = None
    target: FuzzTarget = FuzzTarget.CRASH_ROBOT
    plan: Optional[FuzzPlan] = None
    # detection experiments: attack model and the distance at which it starts
    attack: Optional[str] = None
    attack_distance: Optional[float] = None
    detector: Optional[str] = None
    # extra detectors that only audit; they never stop the trial or trigger mitigation
    audit_methods: tuple = ()
    stop_on_detection: bool = True
    mitigation: bool = False
    hmap: Optional[HistoricalMap] = None
    mode: Optional[SensorMode] = None
    # random fuzzer firing window; the clean run duration
    trial_length: Optional[float] = None
    random_delta: float = 50.0
    random_hold: float = 6.0
    constant_value: float = 60.0
    remit: RemitConfig = field(default_factory=RemitConfig)
    shade: ShadeConfig = field(default_factory=ShadeConfig)
    record_trace: bool = True

    def validate(self) -> None:
        if self.fuzzer is not None and self.fuzzer not in FUZZERS:
            raise ConfigError(f"unknown fuzzer {self.fuzzer!r}")
        if self.attack is not None and self.attack not in ATTACKS:
            raise ConfigError(f"unknown attack model {self.attack!r}")
        if self.fuzzer is not None and self.attack == "suspension":
            raise ConfigError("a fuzzer fabricates values; it cannot drive a suspension attack")
        if self.fuzzer == "random" and self.trial_length is None:
            raise ConfigError("random fuzzing needs the clean trial length")
        needs_map = {self.detector, *self.audit_methods} & {CRV, COMPOSITE}
        if (self.mitigation or needs_map) and self.hmap is None:
            raise ConfigError("CRV and mitigation need a historical map")
        if self.mitigation and self.detector is None:
            raise ConfigError("mitigation needs a detector to trigger it")


@dataclass
class TrialRecord:
    seed: int
    target: str
    success: bool
    crashed: bool
    crash_time: Optional[float]
    crossed_door: bool
    completed: bool
    timed_out: bool
    detected: bool
    method: Optional[str]
    reaction_time: Optional[float]
    attack_started: Optional[float]
    cleaned: float
    running_time: float
    mitigation_at: Optional[float]
    completions: int
    sound_events: list
    audit: list
    rejected: int
    trace: list = field(default_factory=list, repr=False)
    digest: str = ""

    def summary(self) -> dict:
        d = asdict(self)
        d.pop("trace")
        return d


def _round(v: Optional[float], nd: int = 6) -> Optional[float]:
    return None if v is None else round(v, nd)


def _digest(rec: TrialRecord) -> str:
    body = rec.summary()
    body.pop("digest")
    body["trace"] = rec.trace
    return hashlib.sha256(json.dumps(body, sort_keys=True, default=str).encode()).hexdigest()


def _make_generator(cfg: TrialConfig, ctl: Controller, seed: int):
    rng = random.Random(f"fuzzer-{seed}")
    if cfg.fuzzer == "volatile":
        return VolatileFuzzer(rng)
    if cfg.fuzzer == "random":
        return RandomTimeFuzzer.planned(rng, cfg.trial_length, cfg.random_delta, cfg.random_hold)
    if cfg.fuzzer == "constant":
        return ConstantFuzzer(cfg.constant_value)
    plan = cfg.plan or build_plan(cfg.target)
    # detection experiments start substituting as soon as the channel is armed
    forced = cfg.fuzzer is None
    return RoboFuzz(plan, probe=lambda: (ctl.state.phase.value, ctl.state.lane), forced=forced)


def run_trial(scenario: Scenario, seed: int = 0, config: TrialConfig | None = None,
              **overrides) -> TrialRecord:
    cfg = config or TrialConfig()
    for k, v in overrides.items():
        if not hasattr(cfg, k):
            raise ConfigError(f"unknown trial option {k!r}")
        setattr(cfg, k, v)
    cfg.target = FuzzTarget(cfg.target)
    cfg.validate()

    world = scenario.build_world(seed)
    mode = cfg.mode or scenario.sensor_mode
    dt = scenario.tick
    ctl = Controller(scenario.controller, scenario.lane_plan(), mode, dt)
    sensor = Sensor(mode, scenario.latency)
    sensor_rng = random.Random(f"sensor-{seed}")

    shade_cfg = cfg.shade
    if cfg.hmap is not None and "nid_baseline" in cfg.hmap.profile:
        shade_cfg = ShadeConfig(**{**asdict(shade_cfg), "nid_baseline": cfg.hmap.profile["nid_baseline"]})
    detector = Detector(cfg.detector, cfg.hmap, shade_cfg) if cfg.detector else None
    observers = [Detector(m, cfg.hmap, shade_cfg) for m in cfg.audit_methods]
    monitors = ([detector] if detector else []) + observers

    def sink(t, d, s, p):
        for m in monitors:
            m.log.add(t, d, s, p)

    channel = None
    if cfg.fuzzer is not None or cfg.attack is not None:
        model = Suspension() if cfg.attack == "suspension" else Fabrication(_make_generator(cfg, ctl, seed))
        channel = AttackChannel(
            model=model,
            armed=cfg.attack_distance is None,
            latency=scenario.latency,
            rng=random.Random(f"channel-{seed}"),
            packet_sink=sink if monitors else None,
        )

    remit = None
    if cfg.mitigation:
        remit = Remit(cfg.hmap, cfg.remit, channel, random.Random(f"remit-{seed}"))
        ctl.remit = remit

    trace: list = []
    crashed = crossed = detected = False
    crash_time = verdict_hit = None
    next_heartbeat = 0.0
    nid_every = shade_cfg.nid_window
    next_scan = nid_every
    mitigation_at = None

    while True:
        t = world.clock
        if t >= scenario.timeout - 1e-9:
            break
        sensing_pose = world.sensor_pose()
        genuine = sensor.sample(world, sensor_rng)
        if channel is not None and not channel.armed:
            if raycast(world, sensing_pose) <= cfg.attack_distance:
                channel.armed = True
        delivered = deliver(genuine, channel, t)

        if monitors:
            beat = t >= next_heartbeat - 1e-9
            scan = t >= next_scan - 1e-9
            if beat:
                next_heartbeat += HEARTBEAT_PERIOD
            if scan:
                next_scan += nid_every
            latency = None
            if isinstance(mode, Passive) and delivered is not None:
                latency = delivered.observed_latency
            req = DetectionRequest(True, t, mode, latency, sensing_pose, delivered)
            for m in monitors:
                if beat:
                    m.log.add(t, "out", 64, "status")
                verdicts = [m.per_tick(req)]
                if scan:
                    verdicts.append(m.periodic(t))
                hit = next((v for v in verdicts if v.attack), None)
                if m is detector and hit is not None and verdict_hit is None:
                    verdict_hit = hit
                    detected = True
            if verdict_hit is not None and mitigation_at is None:
                if remit is not None:
                    remit.enter(verdict_hit, scenario.controller.velocity_mm_s)
                    mitigation_at = t
                elif cfg.stop_on_detection:
                    break

        cmd = ctl.tick(delivered, world)
        world.step(dt, cmd)
        if world.crossed_door():
            crossed = True
        if cfg.record_trace:
            trace.append({
                "t": t,
                "lane": ctl.state.lane,
                "genuine": _round(genuine.value) if genuine is not None else None,
                "delivered": _round(delivered.value) if delivered is not None else None,
                "fabricated": bool(delivered is not None and delivered.fabricated),
                "x": _round(world.robot_pose.x),
                "y": _round(world.robot_pose.y),
                "phase": ctl.state.phase.value,
                "sensor": [_round(sensing_pose.x), _round(sensing_pose.y), _round(sensing_pose.heading)],
            })
        hit_event = check_collision(world)
        if hit_event is not None:
            crashed, crash_time = True, hit_event.time
            ctl.state.phase = Phase.SPINNING
            if trace:
                trace[-1]["phase"] = Phase.SPINNING.value
            break
        if ctl.state.phase == Phase.DONE:
            break

    if cfg.target == FuzzTarget.CRASH_ROBOT:
        success = crashed
    else:
        success = not crossed
    attack_started = channel.active_since if channel is not None else None
    reaction = None
    if verdict_hit is not None and attack_started is not None:
        reaction = verdict_hit.issued_at - attack_started
    rec = TrialRecord(
        seed=seed,
        target=cfg.target.value,
        success=success,
        crashed=crashed,
        crash_time=crash_time,
        crossed_door=crossed,
        completed=ctl.state.phase == Phase.DONE and (remit is None or remit.stopped is None),
        timed_out=world.clock >= scenario.timeout - 1e-9,
        detected=detected,
        method=verdict_hit.method if verdict_hit else None,
        reaction_time=_round(reaction),
        attack_started=attack_started,
        cleaned=_round(ctl.state.cleaned),
        running_time=_round(world.clock),
        mitigation_at=mitigation_at,
        completions=len(remit.completions) if remit else int(ctl.state.phase == Phase.DONE),
        sound_events=list(remit.state.sound_events) if remit else [],
        audit=[asdict(v) for m in monitors for v in m.audit],
        rejected=ctl.rejected,
        trace=trace,
    )
    rec.digest = _digest(rec)
    return rec


def clean_duration(scenario: Scenario, seed: int = 0) -> float:
    rec = run_trial(scenario, seed, TrialConfig(record_trace=False))
    if not rec.completed or rec.crashed:
        raise ConfigError(f"scenario {scenario.name} does not complete cleanly")
    return rec.running_time


def delivered_series(rec: TrialRecord) -> list[tuple[float, Optional[float]]]:
    return [(r["t"], r["delivered"]) for r in rec.trace]


def arc_length(rec: TrialRecord, start: tuple[float, float]) -> float:
    """Forward path length from the pose trace, excluding lane-change jumps."""
    total, (px, py), lane = 0.0, start, None
    for r in rec.trace:
        if lane is not None and r["lane"] != lane:
            px, py, lane = r["x"], r["y"], r["lane"]
            continue
        total += math.hypot(r["x"] - px, r["y"] - py)
        px, py, lane = r["x"], r["y"], r["lane"]
    return total

"""Scenario files: geometry, robot start, lane plan, controller and sensor settings.

A scenario is a JSON object. Unknown keys are rejected at every level so
typos fail loudly instead of silently falling back to defaults.

Top-level keys::

    name         str
    note         str, free text (shipped files flag their calibration here)
    rooms        [[x0, y0, x1, y1], ...]            cm
    walls        [[x0, y0, x1, y1], ...]            segments, cm
    obstacles    [{id, rect | segment, behavior, active}]
                 behavior: {"kind": "static"}
                           {"kind": "moves_away" | "moves_toward", "speed", "start_time", "direction"}
                           {"kind": "moves_out", "start_time"}
    door         {segment, open_time, trigger_zone} or null
    robot        {start: [x, y, heading_deg], radius}
    lanes        {first_heading_deg, runs: [[start_y, count, step], ...]}
    controller   ControllerConfig fields
    sensor       {mode: passive | proactive | periodic, alert_at, period,
                  latency: {genuine: [lo, hi], via_network: [lo, hi]}}
    tick         s (> 0)
    seed         int
    timeout      s
    start_jitter cm, per-seed uniform offset of the start x
"""
from __future__ import annotations

import copy
import json
import math
import random
from dataclasses import asdict, dataclass, field, fields
from importlib import resources
from pathlib import Path
from typing import Any, Optional

from .controller import ControllerConfig, LanePlan
from .sensing import LatencyModel, Passive, ProactivePeriodic, ProactiveThreshold, SensorMode
from .world import (ROBOT_RADIUS, MovesAwaySameDirection, MovesOutOfPath, MovesTowardRobot,
                    ObstacleSpec, Pose, SlidingDoorSpec, Static, WorldModel)


class ConfigError(ValueError):
    pass


def _check_keys(d: dict, allowed: set, where: str) -> None:
    if not isinstance(d, dict):
        raise ConfigError(f"{where}: expected an object")
    extra = set(d) - allowed
    if extra:
        raise ConfigError(f"{where}: unknown keys {sorted(extra)}")


def _behavior_from(d: dict):
    _check_keys(d, {"kind", "speed", "start_time", "direction"}, "behavior")
    kind = d.get("kind", "static")
    try:
        if kind == "static":
            return Static()
        if kind == "moves_away":
            return MovesAwaySameDirection(float(d["speed"]), float(d["start_time"]),
                                          tuple(d.get("direction", (1.0, 0.0))))
        if kind == "moves_toward":
            return MovesTowardRobot(float(d["speed"]), float(d["start_time"]),
                                    tuple(d.get("direction", (-1.0, 0.0))))
        if kind == "moves_out":
            return MovesOutOfPath(float(d["start_time"]))
    except KeyError as e:
        raise ConfigError(f"behavior {kind!r} is missing {e}") from None
    raise ConfigError(f"unknown behavior kind {kind!r}")


def _behavior_to(b) -> dict:
    out = {"kind": b.kind}
    for f in fields(b):
        v = getattr(b, f.name)
        out[f.name] = list(v) if isinstance(v, tuple) else v
    return out


def mode_from(d: dict) -> SensorMode:
    mode = d.get("mode", "passive")
    if mode == "passive":
        return Passive()
    if mode == "proactive":
        return ProactiveThreshold(float(d.get("alert_at", 20.0)))
    if mode == "periodic":
        return ProactivePeriodic(float(d.get("period", 1.0)))
    raise ConfigError(f"unknown sensor mode {mode!r}")


def mode_to(mode: SensorMode) -> dict:
    if isinstance(mode, ProactiveThreshold):
        return {"mode": "proactive", "alert_at": mode.alert_at}
    if isinstance(mode, ProactivePeriodic):
        return {"mode": "periodic", "period": mode.period}
    return {"mode": "passive"}


@dataclass
class Scenario:
    name: str
    rooms: list
    walls: list
    start: tuple[float, float, float]  # x, y, heading in degrees
    lane_runs: list
    first_heading_deg: float
    obstacles: list = field(default_factory=list)  # raw obstacle dicts
    door: Optional[dict] = None
    robot_radius: float = ROBOT_RADIUS
    controller: ControllerConfig = field(default_factory=ControllerConfig)
    sensor_mode: SensorMode = field(default_factory=Passive)
    latency: LatencyModel = field(default_factory=LatencyModel)
    tick: float = 0.1
    seed: int = 0
    timeout: float = 300.0
    start_jitter: float = 0.0
    note: str = ""

    def __post_init__(self):
        if self.tick <= 0:
            raise ConfigError("tick must be positive")
        if self.timeout <= 0:
            raise ConfigError("timeout must be positive")
        if not self.rooms:
            raise ConfigError("a scenario needs at least one room")
        for ob in self.obstacles:
            self._obstacle(ob)  # validate eagerly

    # -- construction of runtime objects ---------------------------------

    @staticmethod
    def _obstacle(d: dict) -> ObstacleSpec:
        _check_keys(d, {"id", "rect", "segment", "behavior", "active"}, "obstacle")
        try:
            return ObstacleSpec(
                id=str(d["id"]),
                rect=tuple(d["rect"]) if d.get("rect") is not None else None,
                segment=tuple(d["segment"]) if d.get("segment") is not None else None,
                behavior=_behavior_from(d.get("behavior", {"kind": "static"})),
                active=bool(d.get("active", True)),
            )
        except (KeyError, ValueError) as e:
            raise ConfigError(f"bad obstacle {d.get('id')!r}: {e}") from None

    def start_pose(self, seed: Optional[int] = None) -> Pose:
        x, y, heading = self.start
        if self.start_jitter > 0 and seed is not None:
            x += random.Random(f"jitter-{seed}").uniform(-self.start_jitter, self.start_jitter)
        return Pose(x, y, math.radians(heading))

    def build_world(self, seed: Optional[int] = None) -> WorldModel:
        door = None
        if self.door is not None:
            door = SlidingDoorSpec(
                segment=tuple(self.door["segment"]),
                open_time=self.door.get("open_time"),
                trigger_zone=tuple(self.door["trigger_zone"]) if self.door.get("trigger_zone") else None,
            )
        return WorldModel(
            rooms=[tuple(r) for r in self.rooms],
            walls=[tuple(w) for w in self.walls],
            obstacles=[self._obstacle(copy.deepcopy(o)) for o in self.obstacles],
            robot_pose=self.start_pose(seed),
            door=door,
            robot_radius=self.robot_radius,
        )

    def lane_plan(self) -> LanePlan:
        return LanePlan.from_runs(math.radians(self.first_heading_deg),
                                  [tuple(r) for r in self.lane_runs], self.controller.lane_width)

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        xs = [r[0] for r in self.rooms] + [r[2] for r in self.rooms]
        ys = [r[1] for r in self.rooms] + [r[3] for r in self.rooms]
        return min(xs), min(ys), max(xs), max(ys)

    # -- persistence ------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "note": self.note,
            "rooms": [list(r) for r in self.rooms],
            "walls": [list(w) for w in self.walls],
            "obstacles": copy.deepcopy(self.obstacles),
            "door": copy.deepcopy(self.door),
            "robot": {"start": list(self.start), "radius": self.robot_radius},
            "lanes": {"first_heading_deg": self.first_heading_deg,
                      "runs": [list(r) for r in self.lane_runs]},
            "controller": asdict(self.controller),
            "sensor": {**mode_to(self.sensor_mode),
                       "latency": {"genuine": list(self.latency.genuine),
                                   "via_network": list(self.latency.via_network)}},
            "tick": self.tick,
            "seed": self.seed,
            "timeout": self.timeout,
            "start_jitter": self.start_jitter,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        _check_keys(d, {"name", "note", "rooms", "walls", "obstacles", "door", "robot", "lanes",
                        "controller", "sensor", "tick", "seed", "timeout", "start_jitter"}, "scenario")
        robot = d.get("robot", {})
        _check_keys(robot, {"start", "radius"}, "robot")
        lanes = d.get("lanes", {})
        _check_keys(lanes, {"first_heading_deg", "runs"}, "lanes")
        ctl = d.get("controller", {})
        _check_keys(ctl, {f.name for f in fields(ControllerConfig)}, "controller")
        sensor = d.get("sensor", {})
        _check_keys(sensor, {"mode", "alert_at", "period", "latency"}, "sensor")
        lat = sensor.get("latency", {})
        _check_keys(lat, {"genuine", "via_network"}, "sensor.latency")
        if d.get("door") is not None:
            _check_keys(d["door"], {"segment", "open_time", "trigger_zone"}, "door")
        try:
            return cls(
                name=d.get("name", "unnamed"),
                note=d.get("note", ""),
                rooms=d["rooms"],
                walls=d.get("walls", []),
                obstacles=d.get("obstacles", []),
                door=d.get("door"),
                start=tuple(robot["start"]),
                robot_radius=float(robot.get("radius", ROBOT_RADIUS)),
                first_heading_deg=float(lanes["first_heading_deg"]),
                lane_runs=lanes["runs"],
                controller=ControllerConfig(**ctl),
                sensor_mode=mode_from(sensor),
                latency=LatencyModel(tuple(lat.get("genuine", (2.0, 12.0))),
                                     tuple(lat.get("via_network", (200.0, 250.0)))),
                tick=float(d.get("tick", 0.1)),
                seed=int(d.get("seed", 0)),
                timeout=float(d.get("timeout", 300.0)),
                start_jitter=float(d.get("start_jitter", 0.0)),
            )
        except KeyError as e:
            raise ConfigError(f"scenario is missing {e}") from None
        except (TypeError, ValueError) as e:
            raise ConfigError(str(e)) from None

    @classmethod
    def load(cls, path: str | Path) -> "Scenario":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read scenario {path}: {e}") from None
        return cls.from_dict(data)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1))


def builtin(name: str) -> Scenario:
    """Load a shipped scenario by name ("door_rooms" or "cabinet_room")."""
    ref = resources.files("robosec") / "scenarios" / f"{name}.json"
    if not ref.is_file():
        raise ConfigError(f"no built-in scenario {name!r}")
    return Scenario.from_dict(json.loads(ref.read_text()))


def resolve(name_or_path: str) -> Scenario:
    p = Path(name_or_path)
    if p.suffix == ".json" or p.exists():
        return Scenario.load(p)
    return builtin(name_or_path)


def with_overrides(scenario: Scenario, **changes: Any) -> Scenario:
    s = copy.deepcopy(scenario)
    for k, v in changes.items():
        if not hasattr(s, k):
            raise ConfigError(f"unknown scenario field {k!r}")
        setattr(s, k, v)
    return s

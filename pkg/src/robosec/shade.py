"""Shadow detector: latency fingerprinting, cross-reference validation against the
historical map, and periodic network intrusion detection, combined by a
mode-aware dispatch."""
from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from .histmap import HistoricalMap, MapError, expected_range
from .sensing import Passive, ProactiveThreshold, SensorMode, SensorReading
from .world import Pose

log = logging.getLogger(__name__)

FINGERPRINTING = "fingerprinting"
CRV = "crv"
NID = "nid"
COMPOSITE = "shade"
METHODS = (FINGERPRINTING, CRV, NID, COMPOSITE)


@dataclass(frozen=True)
class DetectionRequest:
    has_sensor_info: bool
    time: float
    mode: Optional[SensorMode] = None
    latency: Optional[float] = None  # ms; only measurable in passive mode
    pose: Optional[Pose] = None  # sensor pose
    reading: Optional[SensorReading] = None

    def __post_init__(self):
        if not self.has_sensor_info and (self.mode is not None or self.latency is not None
                                         or self.reading is not None):
            raise ValueError("sensor fields are only allowed on requests with sensor info")


@dataclass(frozen=True)
class DetectionVerdict:
    attack: bool
    method: Optional[str]
    issued_at: float

    def __post_init__(self):
        if self.attack and self.method is None:
            raise ValueError("a positive verdict must name its method")


@dataclass(frozen=True)
class Packet:
    time: float
    direction: str
    size: int
    purpose: str


class PacketLog:
    """Ring of recent packets, trimmed to ``horizon`` seconds."""

    def __init__(self, horizon: float = 30.0):
        self.horizon = horizon
        self.packets: deque[Packet] = deque()

    def add(self, time: float, direction: str = "out", size: int = 64, purpose: str = "status") -> None:
        self.packets.append(Packet(time, direction, size, purpose))
        while self.packets and self.packets[0].time < time - self.horizon:
            self.packets.popleft()

    def count(self, t0: float, t1: float) -> int:
        return sum(1 for p in self.packets if t0 <= p.time < t1)

    def __len__(self) -> int:
        return len(self.packets)


@dataclass
class ShadeConfig:
    fingerprint_threshold_ms: float = 100.0
    crv_tolerance: float = 25.0
    # an alert counts as missing once the map puts the obstacle this far inside alert_at
    crv_alert_slack: float = 0.25
    nid_window: float = 5.0
    nid_factor: float = 2.0
    nid_consecutive: int = 2
    nid_baseline: float = 5.0  # packets per window in clean traffic


def fingerprinting_check(latency_ms: float, threshold_ms: float = 100.0) -> bool:
    return latency_ms > threshold_ms


def crv_check(pose: Pose, reading: Optional[SensorReading], hmap: HistoricalMap,
              mode: Optional[SensorMode] = None, tolerance: float = 25.0,
              alert_slack: float = 0.25) -> bool:
    """Cross-check a reading (or the absence of an alert) against the map."""
    try:
        near, far = expected_range(hmap, pose)
    except MapError:
        log.info("CRV inconclusive: %s", pose)
        return False
    if isinstance(mode, ProactiveThreshold):
        got_alert = reading is not None and reading.is_alert
        if not got_alert:
            return far <= mode.alert_at - alert_slack
        return near > mode.alert_at + tolerance
    if reading is None or reading.value is None:
        return False
    return min(abs(reading.value - near), abs(reading.value - far)) > tolerance


def nid_check(log_: PacketLog, t: float, baseline: float = 5.0, window: float = 5.0,
              factor: float = 2.0, consecutive: int = 2) -> bool:
    """True iff each of the last ``consecutive`` completed scan windows carried at
    least ``factor`` times the clean packet count."""
    completed = int((t + 1e-9) // window)
    if completed < consecutive:
        return False
    for k in range(completed - consecutive, completed):
        if log_.count(k * window, (k + 1) * window) < factor * baseline:
            return False
    return True


def shade(request: DetectionRequest, hmap: Optional[HistoricalMap], log_: PacketLog,
          config: ShadeConfig | None = None) -> DetectionVerdict:
    """Mode-aware dispatch: passive -> fingerprinting; proactive -> CRV or NID;
    no sensor info -> NID."""
    cfg = config or ShadeConfig()
    t = request.time

    def nid() -> bool:
        return nid_check(log_, t, cfg.nid_baseline, cfg.nid_window, cfg.nid_factor, cfg.nid_consecutive)

    if request.has_sensor_info:
        if isinstance(request.mode, Passive):
            if request.latency is None:
                return DetectionVerdict(False, None, t)
            hit = fingerprinting_check(request.latency, cfg.fingerprint_threshold_ms)
            return DetectionVerdict(hit, FINGERPRINTING if hit else None, t + request.latency / 1000.0)
        if hmap is not None and request.pose is not None and crv_check(
                request.pose, request.reading, hmap, request.mode, cfg.crv_tolerance, cfg.crv_alert_slack):
            return DetectionVerdict(True, CRV, _arrival(request))
        hit = nid()
        return DetectionVerdict(hit, NID if hit else None, t)
    hit = nid()
    return DetectionVerdict(hit, NID if hit else None, t)


def _arrival(request: DetectionRequest) -> float:
    r = request.reading
    if r is not None and r.value is not None and not r.is_alert:
        return request.time + r.observed_latency / 1000.0
    return request.time


class Detector:
    """Runs one detection method (or the composite) inside a trial.

    ``per_tick`` gets the request carrying sensor information; ``periodic`` is
    the sensor-free consultation the controller makes every NID window.
    """

    def __init__(self, method: str, hmap: Optional[HistoricalMap], config: ShadeConfig | None = None):
        if method not in METHODS:
            raise ValueError(f"unknown detection method {method!r}")
        if method in (CRV, COMPOSITE) and hmap is None:
            raise ValueError(f"{method} needs a historical map")
        self.method = method
        self.hmap = hmap
        self.config = config or ShadeConfig()
        self.log = PacketLog()
        self.audit: list[DetectionVerdict] = []

    def _record(self, v: DetectionVerdict) -> DetectionVerdict:
        if v.attack:
            self.audit.append(v)
        return v

    def per_tick(self, req: DetectionRequest) -> DetectionVerdict:
        cfg, t = self.config, req.time
        if self.method == COMPOSITE:
            return self._record(shade(req, self.hmap, self.log, cfg))
        if self.method == FINGERPRINTING:
            if isinstance(req.mode, Passive) and req.latency is not None:
                hit = fingerprinting_check(req.latency, cfg.fingerprint_threshold_ms)
                return self._record(DetectionVerdict(hit, FINGERPRINTING if hit else None,
                                                     t + req.latency / 1000.0))
            return DetectionVerdict(False, None, t)
        if self.method == CRV:
            hit = crv_check(req.pose, req.reading, self.hmap, req.mode, cfg.crv_tolerance, cfg.crv_alert_slack)
            return self._record(DetectionVerdict(hit, CRV if hit else None, _arrival(req) if hit else t))
        return DetectionVerdict(False, None, t)

    def periodic(self, t: float) -> DetectionVerdict:
        if self.method not in (NID, COMPOSITE):
            return DetectionVerdict(False, None, t)
        if self.method == COMPOSITE:
            return self._record(shade(DetectionRequest(False, t), self.hmap, self.log, self.config))
        cfg = self.config
        hit = nid_check(self.log, t, cfg.nid_baseline, cfg.nid_window, cfg.nid_factor, cfg.nid_consecutive)
        return self._record(DetectionVerdict(hit, NID if hit else None, t))

"""Ultrasonic distance sensor with passive/proactive modes and a latency fingerprint."""
from __future__ import annotations

import random
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, Optional, Union

from .world import SENSOR_MAX, SENSOR_MIN, WorldModel, raycast

if TYPE_CHECKING:
    from .attack import AttackChannel


@dataclass(frozen=True)
class Passive:
    name = "passive"


@dataclass(frozen=True)
class ProactiveThreshold:
    alert_at: float = 20.0
    name = "proactive"

    def __post_init__(self):
        if not SENSOR_MIN <= self.alert_at <= SENSOR_MAX:
            raise ValueError("alert_at must lie in the sensor range")


@dataclass(frozen=True)
class ProactivePeriodic:
    period: float = 1.0
    name = "periodic"

    def __post_init__(self):
        if self.period <= 0:
            raise ValueError("period must be > 0")


SensorMode = Union[Passive, ProactiveThreshold, ProactivePeriodic]

NUMERIC = "numeric"
ALERT = "alert"


@dataclass(frozen=True)
class SensorReading:
    """One unit on the reading channel. ``value is None`` encodes an absent reading."""

    value: Optional[float]
    kind: str
    timestamp: float
    observed_latency: float  # ms
    mode: SensorMode
    fabricated: bool = False

    @property
    def is_alert(self) -> bool:
        return self.kind == ALERT


@dataclass(frozen=True)
class LatencyModel:
    genuine: tuple[float, float] = (2.0, 12.0)
    via_network: tuple[float, float] = (200.0, 250.0)

    def __post_init__(self):
        g, n = self.genuine, self.via_network
        if g[0] > g[1] or n[0] > n[1]:
            raise ValueError("latency ranges must be ordered")
        if not (g[1] < n[0] or n[1] < g[0]):
            raise ValueError("genuine and network latency ranges must be disjoint")

    def draw_genuine(self, rng: random.Random) -> float:
        return rng.uniform(*self.genuine)

    def draw_network(self, rng: random.Random) -> float:
        return rng.uniform(*self.via_network)


class Sensor:
    """Holds the per-trial state needed by the periodic mode (time of last report)."""

    def __init__(self, mode: SensorMode, latency: LatencyModel | None = None):
        self.mode = mode
        self.latency = latency or LatencyModel()
        self._last_report: Optional[float] = None

    def sample(self, world: WorldModel, rng: random.Random) -> Optional[SensorReading]:
        return sample(world, self.mode, rng, self.latency, self)


def sample(world: WorldModel, mode: SensorMode, rng: random.Random,
           latency: LatencyModel | None = None, state: Sensor | None = None) -> Optional[SensorReading]:
    latency = latency or LatencyModel()
    distance = raycast(world, world.sensor_pose())
    t = world.clock
    if isinstance(mode, ProactiveThreshold):
        if distance > mode.alert_at:
            return None
        return SensorReading(distance, ALERT, t, latency.draw_genuine(rng), mode)
    if isinstance(mode, ProactivePeriodic):
        last = state._last_report if state is not None else None
        # small epsilon so float clocks land on their period boundaries
        if last is not None and t - last < mode.period - 1e-9:
            return None
        if state is not None:
            state._last_report = t
    return SensorReading(distance, NUMERIC, t, latency.draw_genuine(rng), mode)


def deliver(reading: Optional[SensorReading], channel: "AttackChannel | None",
            t: float | None = None) -> Optional[SensorReading]:
    """Pass a genuine reading through the (possibly compromised) channel."""
    if channel is None:
        return reading
    when = t if t is not None else (reading.timestamp if reading is not None else 0.0)
    return channel.intercept(reading, when)


def with_network_latency(reading: SensorReading, value: Optional[float], latency: LatencyModel,
                         rng: random.Random) -> SensorReading:
    return replace(reading, value=value, observed_latency=latency.draw_network(rng), fabricated=True)

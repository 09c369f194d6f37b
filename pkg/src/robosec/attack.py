"""Man-in-the-middle reading channel, the two attack models, and baseline fuzzers."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional, Protocol

from .sensing import LatencyModel, SensorReading, with_network_latency
from .world import SENSOR_MAX, SENSOR_MIN, clamp_range

# Attack packets per intercepted reading: fetch v, push back γ.
PACKETS_PER_INTERCEPT = 2
# A suspension breaks in with a handful of packets and then stays silent.
SUSPENSION_PACKETS = 3

PacketSink = Callable[[float, str, int, str], None]


class Generator(Protocol):
    def substitute(self, reading: Optional[SensorReading], t: float) -> Optional[float]:
        """Fabricated value for this reading, or None to let the genuine one through."""


@dataclass
class Suspension:
    name = "suspension"


@dataclass
class Fabrication:
    generator: Generator
    name = "fabrication"


@dataclass
class AttackChannel:
    model: Optional[Suspension | Fabrication] = None
    compromised: bool = True
    armed: bool = True
    active_since: Optional[float] = None
    latency: LatencyModel = field(default_factory=LatencyModel)
    rng: random.Random = field(default_factory=lambda: random.Random(0))
    packet_sink: Optional[PacketSink] = None
    intercepts: int = 0

    @property
    def live(self) -> bool:
        return self.compromised and self.armed and self.model is not None

    def _mark_active(self, t: float) -> bool:
        first = self.active_since is None
        if first:
            self.active_since = t
        return first

    def _emit(self, t: float, n: int, purpose: str) -> None:
        if self.packet_sink is not None:
            for _ in range(n):
                self.packet_sink(t, "attack", 64, purpose)

    def intercept(self, reading: Optional[SensorReading], t: float) -> Optional[SensorReading]:
        if not self.live:
            return reading
        if isinstance(self.model, Suspension):
            if self._mark_active(t):
                self._emit(t, SUSPENSION_PACKETS, "suspend")
            return None
        if reading is None:
            # nothing on the wire to replace; fabrication never drops
            return None
        value = self.model.generator.substitute(reading, t)
        if value is None:
            return reading
        self._mark_active(t)
        self.intercepts += 1
        self._emit(t, PACKETS_PER_INTERCEPT, "fabricate")
        return with_network_latency(reading, clamp_range(value), self.latency, self.rng)


# -- baselines ------------------------------------------------------------

MIN_SWING = 30.0


def volatile_stream(rng: random.Random, start: Optional[float] = None) -> Iterator[float]:
    """Endless Radamsa-like stream over the sensor range.

    Successive values swing by more than ``MIN_SWING`` and alternate direction,
    so every interior point of any window is a large reversal.
    """
    x = rng.uniform(SENSOR_MIN, SENSOR_MAX) if start is None else start
    up = rng.random() < 0.5
    while True:
        yield round(x)
        if up:
            lo, hi = x + MIN_SWING + 1, SENSOR_MAX
        else:
            lo, hi = SENSOR_MIN, x - MIN_SWING - 1
        if lo > hi:  # pinned against a range edge: swing the other way
            up = not up
            lo, hi = (x + MIN_SWING + 1, SENSOR_MAX) if up else (SENSOR_MIN, x - MIN_SWING - 1)
        x = rng.uniform(lo, hi)
        up = not up


@dataclass
class VolatileFuzzer:
    """Feeds a finite series of volatile values from ``start_time`` onwards."""

    rng: random.Random
    length: int = 1006
    start_time: float = 0.0
    emitted: int = 0

    def __post_init__(self):
        self._stream = volatile_stream(self.rng)

    def substitute(self, reading, t):
        if t < self.start_time - 1e-9 or self.emitted >= self.length:
            return None
        if reading is None or reading.is_alert:
            return None
        self.emitted += 1
        return float(next(self._stream))


def random_attack_plan(rng: random.Random, trial_length: float, delta: float = 50.0) -> tuple[float, float]:
    if trial_length <= 0:
        raise ValueError("trial_length must be > 0")
    return rng.uniform(0.0, trial_length), delta


@dataclass
class RandomTimeFuzzer:
    """One hazardous alteration v -> v + delta, fired once and held for ``hold`` seconds."""

    fire_time: float
    delta: float = 50.0
    hold: float = 6.0

    @classmethod
    def planned(cls, rng: random.Random, trial_length: float, delta: float = 50.0, hold: float = 6.0):
        fire, d = random_attack_plan(rng, trial_length, delta)
        return cls(fire, d, hold)

    def substitute(self, reading, t):
        if reading is None or reading.value is None or reading.is_alert:
            return None
        if self.fire_time - 1e-9 <= t < self.fire_time + self.hold:
            return reading.value + self.delta
        return None


@dataclass
class ConstantFuzzer:
    """Replaces every reading by a fixed value (the 10 cm -> 60 cm style substitution)."""

    value: float

    def substitute(self, reading, t):
        if reading is None or reading.is_alert:
            return None
        return self.value

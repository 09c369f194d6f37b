"""Directed sensor-value fuzzer.

RoboFuzz sits on the compromised reading channel, watches the genuine
distance stream and the robot's control state, and waits for a reading
pattern that matches one of its plan's monitored states. When that happens
it starts substituting values that follow a physically legitimate curve
class, so the controller's plausibility filter accepts them while the robot
is steered into the attacker's intended behaviour.
"""
from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .sensing import SensorReading
from .world import SENSOR_MAX, SENSOR_MIN, clamp_range


class FuzzTarget(str, enum.Enum):
    CRASH_ROBOT = "CrashRobot"
    REDUCE_EFFICACY = "ReduceEfficacy"


class Trend(str, enum.Enum):
    GRADUAL_DECREASE = "GradualDecrease"
    SHARP_DECREASE = "SharpDecrease"
    SUDDEN_INCREASE = "SuddenIncrease"
    JUMP_THEN_DECREASE = "JumpThenDecrease"
    FLAT = "Flat"


@dataclass(frozen=True)
class TrendConfig:
    window: int = 5
    closing_speed: float = 5.0  # cm/s, the robot's own approach speed
    sharp_factor: float = 1.5
    gradual_factor: float = 0.5
    jump: float = 50.0


@dataclass(frozen=True)
class StateSnapshot:
    control_state: str
    v: float
    trend: Trend
    time: float
    # value of the pre-jump approach line extrapolated to ``time`` (None without a jump)
    anchor: Optional[float] = None


@dataclass(frozen=True)
class ComponentInventory:
    sensors: tuple[str, ...] = ("distance_sensor",)
    actuators: tuple[str, ...] = ("wheel_drive",)

    def __post_init__(self):
        if not self.sensors:
            raise ValueError("a robot needs at least one sensor to fuzz")


@dataclass(frozen=True)
class FuzzFunction:
    """Maps (state, time since trigger) to a substitute value.

    ``slope`` is in cm/s; ``base`` picks the starting point: the triggering
    reading itself, or the pre-jump approach line.
    """

    name: str
    domain: frozenset
    slope: float
    base: str = "trigger"  # or "anchor"
    component: str = "distance_sensor"

    def covers(self, trend: Trend) -> bool:
        return trend in self.domain


@dataclass(frozen=True)
class FuzzTuple:
    v: Optional[float]
    gamma: Optional[float]
    f: FuzzFunction

    def __post_init__(self):
        if self.gamma is not None and not SENSOR_MIN <= self.gamma <= SENSOR_MAX:
            raise ValueError(f"gamma {self.gamma} outside the sensor range")


@dataclass(frozen=True)
class FuzzPlan:
    target: FuzzTarget
    states: frozenset
    components: frozenset
    tuples: tuple[FuzzTuple, ...]
    # CrashRobot waits for the genuine reading to drop below this
    trigger_distance: float = 25.0

    def __post_init__(self):
        for z in self.states:
            if not any(t.f.covers(z) for t in self.tuples):
                raise ValueError(f"state {z} has no fuzz tuple defined on it")
        for t in self.tuples:
            if t.f.component not in self.components:
                raise ValueError(f"tuple uses {t.f.component}, not in the plan's components")

    def function_for(self, trend: Trend) -> Optional[FuzzFunction]:
        for t in self.tuples:
            if t.f.covers(trend):
                return t.f
        return None


def build_plan(target: FuzzTarget | str, inventory: ComponentInventory | None = None,
               rise_rate: float = 5.0, closing_speed: float = 5.0,
               trigger_distance: float = 25.0) -> FuzzPlan:
    target = FuzzTarget(target)
    inventory = inventory or ComponentInventory()
    sensor = inventory.sensors[0]
    if target == FuzzTarget.CRASH_ROBOT:
        states = frozenset({Trend.GRADUAL_DECREASE, Trend.SHARP_DECREASE})
        # the obstacle appears to retreat: readings keep growing slowly
        f = FuzzFunction("retreating_obstacle", states, +rise_rate, "trigger", sensor)
    else:
        states = frozenset({Trend.SUDDEN_INCREASE, Trend.JUMP_THEN_DECREASE})
        # the opening never happened: the old surface keeps approaching
        f = FuzzFunction("immovable_wall", states, -closing_speed, "anchor", sensor)
    return FuzzPlan(target, states, frozenset({sensor}), (FuzzTuple(None, None, f),),
                    trigger_distance)


def _slope(times: np.ndarray, values: np.ndarray) -> float:
    if len(values) < 2 or np.ptp(times) == 0:
        return 0.0
    return float(np.polyfit(times, values, 1)[0])


def observe(history, control_state: str = "Forward", config: TrendConfig | None = None,
            spacing: float = 1.0) -> StateSnapshot:
    """Classify the recent genuine readings.

    ``history`` is a sequence of (time, value) pairs, or plain values spaced
    ``spacing`` seconds apart.
    """
    cfg = config or TrendConfig()
    pts = [(i * spacing, float(h)) if not isinstance(h, tuple) else (float(h[0]), float(h[1]))
           for i, h in enumerate(history)]
    if not pts:
        raise ValueError("observe needs at least one reading")
    t_now, v_now = pts[-1]
    if len(pts) < cfg.window:
        return StateSnapshot(control_state, v_now, Trend.FLAT, t_now)
    pts = pts[-cfg.window:]
    times = np.array([p[0] for p in pts])
    values = np.array([p[1] for p in pts])
    diffs = np.diff(values)
    jumps = np.flatnonzero(diffs > cfg.jump)
    if jumps.size:
        k = int(jumps[-1])  # index of the last pre-jump reading
        t_pre, v_pre = pts[k]
        pre_slope = _slope(times[:k + 1], values[:k + 1])
        if k + 1 < 2 or pre_slope >= 0:
            pre_slope = -cfg.closing_speed
        anchor = v_pre + pre_slope * (t_now - t_pre)
        after = values[k + 1:]
        if len(after) >= 2 and _slope(times[k + 1:], after) < 0:
            return StateSnapshot(control_state, v_now, Trend.JUMP_THEN_DECREASE, t_now, anchor)
        return StateSnapshot(control_state, v_now, Trend.SUDDEN_INCREASE, t_now, anchor)
    slope = _slope(times, values)
    c = cfg.closing_speed
    if slope < -cfg.sharp_factor * c:
        trend = Trend.SHARP_DECREASE
    elif slope <= -cfg.gradual_factor * c:
        trend = Trend.GRADUAL_DECREASE
    elif slope > cfg.gradual_factor * c:
        trend = Trend.SUDDEN_INCREASE
    else:
        trend = Trend.FLAT
    return StateSnapshot(control_state, v_now, trend, t_now)


def should_trigger(plan: FuzzPlan, snapshot: StateSnapshot) -> bool:
    trend = snapshot.trend
    if trend not in plan.states or plan.function_for(trend) is None:
        return False
    if plan.target == FuzzTarget.CRASH_ROBOT:
        if trend == Trend.GRADUAL_DECREASE:
            return snapshot.v < plan.trigger_distance
        return trend == Trend.SHARP_DECREASE
    return trend in (Trend.SUDDEN_INCREASE, Trend.JUMP_THEN_DECREASE)


def gamma_for(f: FuzzFunction, snapshot: StateSnapshot, t_since_trigger: float) -> float:
    base = snapshot.v
    if f.base == "anchor" and snapshot.anchor is not None:
        base = snapshot.anchor
    return clamp_range(base + f.slope * t_since_trigger)


@dataclass
class FuzzEpisode:
    trigger: StateSnapshot
    f: FuzzFunction
    lane: int
    emitted: list[FuzzTuple] = field(default_factory=list)
    ended_at: Optional[float] = None


StateProbe = Callable[[], tuple[str, int]]


class RoboFuzz:
    """Channel generator implementing the wait-observe-trigger-substitute loop.

    ``probe`` returns the robot's (control state, lane index); history resets
    when either changes, and an active episode ends at the next lane change.
    With ``forced`` the first armed reading triggers immediately, which is
    what detection experiments use to start an attack at a chosen moment.
    """

    def __init__(self, plan: FuzzPlan, probe: Optional[StateProbe] = None,
                 trend: TrendConfig | None = None, forced: bool = False):
        self.plan = plan
        self.probe = probe or (lambda: ("Forward", 0))
        self.trend = trend or TrendConfig()
        self.forced = forced
        self.history: deque = deque(maxlen=self.trend.window)
        self.episodes: list[FuzzEpisode] = []
        self.active: Optional[FuzzEpisode] = None
        self._context: Optional[tuple[str, int]] = None

    @property
    def triggered(self) -> bool:
        return bool(self.episodes)

    def _track_context(self, t: float) -> None:
        state, lane = self.probe()
        ctx = (state, lane)
        if self._context is not None and ctx != self._context:
            self.history.clear()
            if self.active is not None and lane != self.active.lane:
                self.active.ended_at = t
                self.active = None
        self._context = ctx

    def substitute(self, reading: Optional[SensorReading], t: float) -> Optional[float]:
        if reading is None or reading.value is None or reading.is_alert:
            return None
        self._track_context(t)
        self.history.append((t, reading.value))
        if self.active is None:
            snap = observe(list(self.history), self._context[0], self.trend)
            if self.forced and not self.episodes:
                f = self.plan.tuples[0].f
                snap = StateSnapshot(snap.control_state, snap.v, min(f.domain), t,
                                     snap.anchor if snap.anchor is not None else snap.v)
            elif not should_trigger(self.plan, snap):
                return None
            f = self.plan.function_for(snap.trend)
            self.active = FuzzEpisode(snap, f, self._context[1])
            self.episodes.append(self.active)
        ep = self.active
        gamma = gamma_for(ep.f, ep.trigger, t - ep.trigger.time)
        ep.emitted.append(FuzzTuple(reading.value, gamma, ep.f))
        return gamma


def run(plan: FuzzPlan, scenario, seed: int = 0, **kwargs):
    """Run one trial of ``plan`` against ``scenario`` through a compromised channel."""
    from .trial import run_trial
    return run_trial(scenario, seed=seed, fuzzer="robofuzz", target=plan.target, plan=plan, **kwargs)

"""Robot control program: zigzag coverage, safe-distance rule, volatility filter."""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Optional

from .sensing import ProactivePeriodic, ProactiveThreshold, SensorMode, SensorReading
from .world import Command, Pose, WorldModel

if TYPE_CHECKING:
    from .remit import Remit

EAST = 0.0
WEST = math.pi


class Phase(str, Enum):
    IDLE = "Idle"
    FORWARD = "Forward"
    TURNING = "Turning"
    DOOR_CROSSING = "DoorCrossing"
    SPINNING = "Spinning"
    MITIGATION = "Mitigation"
    DONE = "Done"


MOVING_PHASES = (Phase.FORWARD, Phase.DOOR_CROSSING, Phase.MITIGATION)


@dataclass
class VolatilityFilter:
    """Rejects streams that keep swinging back and forth by large amounts.

    A reversal is an interior point of the window where the per-step change
    flips sign and at least one of the two changes exceeds
    ``reversal_magnitude``. A single jump (door opening, obstacle leaving)
    contributes at most two reversals and therefore passes.
    """

    window: int = 6
    max_reversals: int = 3
    reversal_magnitude: float = 30.0
    values: deque = field(default_factory=deque)

    def __post_init__(self):
        if self.window < 3:
            raise ValueError("filter window must be >= 3")
        self.values = deque(self.values, maxlen=self.window)

    def reversals(self, values=None) -> int:
        v = list(self.values if values is None else values)
        n = 0
        for a, b, c in zip(v, v[1:], v[2:]):
            d1, d2 = b - a, c - b
            if d1 * d2 < 0 and max(abs(d1), abs(d2)) > self.reversal_magnitude:
                n += 1
        return n

    def push(self, value: float) -> bool:
        """Record ``value``; True if it is accepted."""
        self.values.append(value)
        return self.reversals() < self.max_reversals

    @property
    def warm(self) -> bool:
        """Enough history that a volatile stream could have been rejected."""
        return len(self.values) >= self.max_reversals + 2


def volatility_check(filt: VolatilityFilter, reading: SensorReading) -> str:
    if reading.value is None:
        raise ValueError("volatility_check needs a numeric reading")
    return "accept" if filt.push(reading.value) else "reject"


@dataclass(frozen=True)
class Lane:
    index: int
    y: float
    heading: float


@dataclass
class LanePlan:
    lanes: list[Lane]

    @classmethod
    def from_runs(cls, first_heading: float, runs: list[tuple[float, int, int]], lane_width: float) -> "LanePlan":
        """``runs``: (start_y, count, step sign). Headings alternate across the whole plan."""
        lanes, heading = [], first_heading
        for start_y, count, step in runs:
            for k in range(count):
                lanes.append(Lane(len(lanes), start_y + step * k * lane_width, heading))
                heading = WEST if heading == EAST else EAST
        return cls(lanes)


@dataclass
class ControlState:
    phase: Phase = Phase.IDLE
    lane: int = 0
    cleaned: float = 0.0
    turns: int = 0
    resets: int = 0


def plan_next_lane(state: ControlState, plan: LanePlan) -> Optional[Lane]:
    nxt = state.lane + 1
    if nxt >= len(plan.lanes):
        return None
    return plan.lanes[nxt]


@dataclass
class ControllerConfig:
    safe_distance: float = 20.0
    velocity_mm_s: float = 50.0
    lane_width: float = 34.0
    filter_window: int = 6
    filter_max_reversals: int = 3
    filter_reversal_magnitude: float = 30.0
    caution_seconds: float = 2.0

    @property
    def velocity(self) -> float:
        return self.velocity_mm_s / 10.0


class Controller:
    def __init__(self, config: ControllerConfig, plan: LanePlan, mode: SensorMode, dt: float):
        self.config = config
        self.plan = plan
        self.mode = mode
        self.dt = dt
        self.state = ControlState()
        self.filter = VolatilityFilter(config.filter_window, config.filter_max_reversals,
                                       config.filter_reversal_magnitude)
        self.remit: Optional["Remit"] = None
        self.rejected = 0
        self.perceived: Optional[float] = None
        self._absent_streak = 0
        self._last_value: Optional[float] = None
        self._since_last = 0.0

    # -- helpers ----------------------------------------------------------

    @property
    def in_mitigation(self) -> bool:
        return self.remit is not None and self.remit.active

    def _forward(self, world: WorldModel, speed: float, phase: Optional[Phase] = None) -> Command:
        if phase is None:
            phase = Phase.FORWARD
            if world.door is not None and world.door.is_open and self._near_door(world):
                phase = Phase.DOOR_CROSSING
        self.state.phase = phase
        self.state.cleaned += speed * self.dt
        self._since_last += speed * self.dt
        return Command(velocity=speed)

    def _near_door(self, world: WorldModel) -> bool:
        x0, y0, x1, y1 = world.door.segment
        p = world.robot_pose
        return (abs(p.x - x0) <= world.robot_radius + self.config.safe_distance
                and min(y0, y1) <= p.y <= max(y0, y1))

    def _stop(self, phase: Optional[Phase] = None) -> Command:
        if phase is not None:
            self.state.phase = phase
        return Command(velocity=0.0)

    def turn(self, world: WorldModel) -> Command:
        lane = plan_next_lane(self.state, self.plan)
        if lane is None:
            self.state.phase = Phase.DONE
            return Command(velocity=0.0)
        self.state.phase = Phase.TURNING
        self.state.lane = lane.index
        self.state.turns += 1
        self._last_value = None
        p = world.robot_pose
        return Command(teleport=Pose(p.x, lane.y, lane.heading))

    def reset_sensor(self) -> None:
        self.state.resets += 1

    # -- main entry -------------------------------------------------------

    def tick(self, reading: Optional[SensorReading], world: WorldModel) -> Command:
        if self.state.phase in (Phase.DONE, Phase.SPINNING):
            return Command(velocity=0.0)
        if self.in_mitigation:
            return self.remit.mitigation_tick(self, world)
        speed = self.config.velocity
        perceived = self._perceive(reading)
        self.perceived = perceived
        if perceived == "reject":
            self.reset_sensor()
            return self._stop(Phase.FORWARD)
        if perceived == "warmup":
            return self._stop(Phase.IDLE)
        if perceived == "absent":
            self._absent_streak += 1
            cycle = 1 + round(self.config.caution_seconds / self.dt)
            if (self._absent_streak - 1) % cycle == 0:
                self.reset_sensor()
                return self._stop(Phase.FORWARD)
            return self._forward(world, speed / 2)
        self._absent_streak = 0
        if perceived is not None and perceived <= self.config.safe_distance:
            return self.turn(world)
        return self._forward(world, speed)

    def _perceive(self, reading: Optional[SensorReading]):
        mode = self.mode
        if isinstance(mode, ProactiveThreshold):
            # stop-and-turn on any alert; silence means open road
            if reading is not None and reading.is_alert:
                return 0.0 if reading.value is None else min(reading.value, mode.alert_at)
            return None
        if reading is None or reading.value is None:
            if isinstance(mode, ProactivePeriodic):
                if self._last_value is None:
                    return None
                return self._last_value - self._since_last
            return "absent"
        if not self.filter.push(reading.value):
            self.rejected += 1
            return "reject"
        if not self.filter.warm:
            # readings are not acted on until the filter could judge them
            return "warmup"
        self._last_value = reading.value
        self._since_last = 0.0
        return reading.value

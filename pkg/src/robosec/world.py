"""Deterministic 2D environment: walls, obstacles, a sliding door and one disc robot.

Units are centimetres, seconds and radians throughout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

SENSOR_MIN = 2.0
SENSOR_MAX = 400.0
CRASH_THRESHOLD = 5.0
ROBOT_RADIUS = 17.0

Segment = tuple[float, float, float, float]
Rect = tuple[float, float, float, float]

TWO_PI = 2.0 * math.pi


def normalize_heading(heading: float) -> float:
    h = math.fmod(heading, TWO_PI)
    if h < 0:
        h += TWO_PI
    # fmod can return exactly 2π after the += for tiny negatives
    return 0.0 if h >= TWO_PI else h


def unit(heading: float) -> tuple[float, float]:
    """Heading unit vector, snapped so axis-aligned headings are exact."""
    c, s = math.cos(heading), math.sin(heading)
    if abs(c) < 1e-12:
        c = 0.0
    if abs(s) < 1e-12:
        s = 0.0
    return c, s


@dataclass(frozen=True)
class Pose:
    x: float
    y: float
    heading: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"pose must be finite, got ({self.x}, {self.y})")
        object.__setattr__(self, "heading", normalize_heading(self.heading))

    def advanced(self, distance: float) -> "Pose":
        c, s = unit(self.heading)
        return Pose(self.x + distance * c, self.y + distance * s, self.heading)


# -- obstacle behaviours (the four curve classes of a straight approach) ------

@dataclass(frozen=True)
class Static:
    kind = "static"


@dataclass(frozen=True)
class MovesAwaySameDirection:
    speed: float
    start_time: float
    direction: tuple[float, float] = (1.0, 0.0)
    kind = "moves_away"

    def __post_init__(self):
        if self.speed <= 0:
            raise ValueError("dynamic obstacle speed must be > 0")


@dataclass(frozen=True)
class MovesTowardRobot:
    speed: float
    start_time: float
    direction: tuple[float, float] = (-1.0, 0.0)
    kind = "moves_toward"

    def __post_init__(self):
        if self.speed <= 0:
            raise ValueError("dynamic obstacle speed must be > 0")


@dataclass(frozen=True)
class MovesOutOfPath:
    """Leaves the scene at ``start_time`` (a pet walking off, a door sliding away)."""

    start_time: float
    kind = "moves_out"


Behavior = Static | MovesAwaySameDirection | MovesTowardRobot | MovesOutOfPath


@dataclass
class ObstacleSpec:
    id: str
    rect: Optional[Rect] = None
    segment: Optional[Segment] = None
    behavior: Behavior = field(default_factory=Static)
    active: bool = True
    # accumulated displacement, advanced by WorldModel.step
    offset: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if (self.rect is None) == (self.segment is None):
            raise ValueError(f"obstacle {self.id!r} needs exactly one of rect/segment")

    @property
    def is_static(self) -> bool:
        return isinstance(self.behavior, Static)

    def displacement_at(self, t: float) -> tuple[float, float]:
        """Closed-form displacement at absolute time ``t``."""
        b = self.behavior
        if isinstance(b, (MovesAwaySameDirection, MovesTowardRobot)):
            d = b.speed * max(0.0, t - b.start_time)
            return d * b.direction[0], d * b.direction[1]
        return 0.0, 0.0

    def present_at(self, t: float) -> bool:
        if not self.active:
            return False
        if isinstance(self.behavior, MovesOutOfPath):
            return t < self.behavior.start_time
        return True

    def segments(self) -> list[Segment]:
        ox, oy = self.offset
        if self.segment is not None:
            x0, y0, x1, y1 = self.segment
            return [(x0 + ox, y0 + oy, x1 + ox, y1 + oy)]
        return rect_segments(self.rect, ox, oy)


def rect_segments(rect: Rect, ox: float = 0.0, oy: float = 0.0) -> list[Segment]:
    x0, y0, x1, y1 = rect
    x0, x1, y0, y1 = x0 + ox, x1 + ox, y0 + oy, y1 + oy
    return [(x0, y0, x1, y0), (x1, y0, x1, y1), (x1, y1, x0, y1), (x0, y1, x0, y0)]


@dataclass
class SlidingDoorSpec:
    segment: Segment
    open_time: Optional[float] = None
    # robot centre entering this rectangle opens the door (automatic door sensor)
    trigger_zone: Optional[Rect] = None
    is_open: bool = False
    opened_at: Optional[float] = None


@dataclass(frozen=True)
class CollisionEvent:
    time: float
    obstacle_id: str
    min_separation: float


@dataclass
class Command:
    """Actuator command for one tick.

    ``velocity`` is forward speed in cm/s; ``teleport`` applies an instantaneous
    lane change (turn execution is one tick).
    """

    velocity: float = 0.0
    teleport: Optional[Pose] = None


@dataclass
class WorldModel:
    rooms: list[Rect]
    walls: list[Segment]
    obstacles: list[ObstacleSpec]
    robot_pose: Pose
    door: Optional[SlidingDoorSpec] = None
    robot_radius: float = ROBOT_RADIUS
    clock: float = 0.0
    bounds: Optional[Rect] = None

    def __post_init__(self):
        if self.bounds is None:
            xs = [r[0] for r in self.rooms] + [r[2] for r in self.rooms]
            ys = [r[1] for r in self.rooms] + [r[3] for r in self.rooms]
            self.bounds = (min(xs), min(ys), max(xs), max(ys))
        self._update_door()

    # -- geometry ---------------------------------------------------------

    def labelled_segments(self, static_only: bool = False) -> list[tuple[str, Segment]]:
        out = [(f"wall{i}", s) for i, s in enumerate(self.walls)]
        if self.door is not None and not self.door.is_open and not static_only:
            out.append(("door", self.door.segment))
        for ob in self.obstacles:
            if static_only and not ob.is_static:
                continue
            if ob.present_at(self.clock):
                out.extend((ob.id, s) for s in ob.segments())
        return out

    def segments(self) -> list[Segment]:
        return [s for _, s in self.labelled_segments()]

    def sensor_pose(self, pose: Optional[Pose] = None) -> Pose:
        """The sensor sits on the front face of the robot disc."""
        p = self.robot_pose if pose is None else pose
        return p.advanced(self.robot_radius)

    # -- time stepping ----------------------------------------------------

    def step(self, dt: float, command: Optional[Command] = None) -> "WorldModel":
        if dt <= 0:
            raise ValueError("dt must be positive")
        t0, t1 = self.clock, self.clock + dt
        for ob in self.obstacles:
            b = ob.behavior
            if isinstance(b, (MovesAwaySameDirection, MovesTowardRobot)):
                moving = max(0.0, t1 - max(t0, b.start_time))
                if moving > 0:
                    d = b.speed * moving
                    ob.offset = (ob.offset[0] + d * b.direction[0], ob.offset[1] + d * b.direction[1])
        if command is not None:
            if command.teleport is not None:
                self.robot_pose = command.teleport
            elif command.velocity:
                self.robot_pose = self.robot_pose.advanced(command.velocity * dt)
        # rounding keeps long runs of 0.1 s ticks on exact decimal times
        self.clock = round(t1, 9)
        self._update_door()
        return self

    def _update_door(self) -> None:
        door = self.door
        if door is None or door.is_open:
            return
        opened = door.open_time is not None and self.clock >= door.open_time
        if door.trigger_zone is not None:
            x0, y0, x1, y1 = door.trigger_zone
            p = self.robot_pose
            opened = opened or (x0 <= p.x <= x1 and y0 <= p.y <= y1)
        if opened:
            door.is_open = True
            door.opened_at = self.clock

    def crossed_door(self, pose: Optional[Pose] = None) -> bool:
        """True once the robot centre is on the far (+x) side of the door line."""
        if self.door is None:
            return False
        p = self.robot_pose if pose is None else pose
        x0, y0, x1, y1 = self.door.segment
        return p.x > max(x0, x1) and min(y0, y1) <= p.y <= max(y0, y1)


# -- free functions -------------------------------------------------------

def ray_segment_distance(ox: float, oy: float, dx: float, dy: float, seg: Segment) -> Optional[float]:
    x0, y0, x1, y1 = seg
    ex, ey = x1 - x0, y1 - y0
    denom = dx * ey - dy * ex
    if abs(denom) < 1e-12:
        return None
    wx, wy = x0 - ox, y0 - oy
    t = (wx * ey - wy * ex) / denom
    u = (wx * dy - wy * dx) / denom
    if t < 0 or u < -1e-12 or u > 1 + 1e-12:
        return None
    return t


def clamp_range(d: float) -> float:
    return min(SENSOR_MAX, max(SENSOR_MIN, d))


def raycast(world: WorldModel, pose: Pose) -> float:
    """Distance from ``pose`` along its heading to the first surface, clamped to [2, 400]."""
    dx, dy = unit(pose.heading)
    best = math.inf
    for seg in world.segments():
        t = ray_segment_distance(pose.x, pose.y, dx, dy, seg)
        if t is not None and t < best:
            best = t
    return clamp_range(best)


def point_segment_distance(px: float, py: float, seg: Segment) -> float:
    x0, y0, x1, y1 = seg
    ex, ey = x1 - x0, y1 - y0
    L2 = ex * ex + ey * ey
    if L2 == 0:
        return math.hypot(px - x0, py - y0)
    u = max(0.0, min(1.0, ((px - x0) * ex + (py - y0) * ey) / L2))
    return math.hypot(px - (x0 + u * ex), py - (y0 + u * ey))


def min_separation(world: WorldModel, pose: Optional[Pose] = None) -> tuple[float, str]:
    p = world.robot_pose if pose is None else pose
    best, who = math.inf, ""
    for label, seg in world.labelled_segments():
        d = point_segment_distance(p.x, p.y, seg) - world.robot_radius
        if d < best:
            best, who = d, label
    return best, who


def check_collision(world: WorldModel) -> Optional[CollisionEvent]:
    sep, who = min_separation(world)
    if sep < CRASH_THRESHOLD:
        return CollisionEvent(world.clock, who, sep)
    return None

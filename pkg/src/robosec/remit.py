"""Mitigation mode: slow down, navigate by historical records, keep cleaning."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Optional

from .controller import Controller, Phase, plan_next_lane
from .histmap import HistoricalMap, MapError, expected_distance
from .shade import DetectionVerdict
from .world import CRASH_THRESHOLD, Command, Pose, WorldModel, min_separation

if TYPE_CHECKING:
    from .attack import AttackChannel

NORMAL = "Normal"
MITIGATION = "Mitigation"


@dataclass
class RemitConfig:
    speed_factor: float = 0.9
    # map-predicted distance at which to turn, on top of the safe distance
    margin: float = 5.0
    p_block: float = 0.0
    retries: int = 5
    sound_wait: float = 1.0


@dataclass
class MitigationState:
    mode: str = NORMAL
    speed: float = 0.0  # mm/s
    block_attempts: int = 0
    sensor_resets: int = 0
    sound_events: list[float] = field(default_factory=list)
    transitions: list[tuple[float, str, str]] = field(default_factory=list)


def enter_mitigation(state: MitigationState, cause: DetectionVerdict, normal_speed_mm_s: float,
                     speed_factor: float = 0.9) -> MitigationState:
    if not cause.attack:
        raise ValueError("mitigation needs a positive verdict")
    if state.mode == MITIGATION:
        return state
    state.mode = MITIGATION
    state.speed = normal_speed_mm_s * speed_factor
    state.transitions.append((cause.issued_at, MITIGATION, cause.method))
    return state


def try_block_attacker(state: MitigationState, channel: Optional["AttackChannel"], rng: random.Random,
                       p_block: float, t: float = 0.0, normal_speed_mm_s: float = 50.0) -> bool:
    state.block_attempts += 1
    if p_block <= 0 or rng.random() >= p_block:
        return False
    if channel is not None:
        channel.compromised = False
    state.mode = NORMAL
    state.speed = normal_speed_mm_s
    state.transitions.append((t, NORMAL, "attacker blocked"))
    return True


class Remit:
    def __init__(self, hmap: HistoricalMap, config: RemitConfig | None = None,
                 channel: Optional["AttackChannel"] = None, rng: random.Random | None = None):
        self.hmap = hmap
        self.config = config or RemitConfig()
        self.channel = channel
        self.rng = rng or random.Random(0)
        self.state = MitigationState()
        self.completions: list[float] = []
        self.stopped: Optional[str] = None
        self._wait_until: Optional[float] = None
        self._retries = 0
        # (lane y to return to, distance driven while sidestepped)
        self._detour: Optional[tuple[float, float]] = None

    @property
    def active(self) -> bool:
        return self.state.mode == MITIGATION

    def enter(self, verdict: DetectionVerdict, normal_speed_mm_s: float) -> None:
        enter_mitigation(self.state, verdict, normal_speed_mm_s, self.config.speed_factor)

    def mitigation_tick(self, ctl: Controller, world: WorldModel) -> Command:
        t = world.clock
        # reset requests change nothing while the channel stays compromised
        self.state.sensor_resets += 1
        if try_block_attacker(self.state, self.channel, self.rng, self.config.p_block, t,
                              ctl.config.velocity_mm_s):
            return Command(velocity=0.0)
        if self._wait_until is not None and t < self._wait_until - 1e-9:
            return Command(velocity=0.0)
        self._wait_until = None
        try:
            predicted = expected_distance(self.hmap, world.sensor_pose())
        except MapError:
            self.stopped = "pose outside historical map"
            ctl.state.phase = Phase.DONE
            return Command(velocity=0.0)
        ctl.perceived = predicted
        if predicted <= ctl.config.safe_distance + self.config.margin:
            self._retries = 0
            if self._detour is not None:
                # lane end reached while sidestepped: rejoin the lane before turning
                back = self._rejoin(world)
                if back is not None:
                    return back
            cmd = ctl.turn(world)
            self._note_done(ctl, t)
            return cmd
        speed = self.state.speed / 10.0
        step = speed * ctl.dt
        if self._detour is not None and self._detour[1] >= 2 * world.robot_radius:
            back = self._rejoin(world, step)
            if back is not None:
                return back
        ahead = world.robot_pose.advanced(step)
        sep, _ = min_separation(world, ahead)
        if sep < CRASH_THRESHOLD:
            return self.handle_blocked_path(ctl, world)
        self._retries = 0
        if self._detour is not None:
            self._detour = (self._detour[0], self._detour[1] + step)
        return ctl._forward(world, speed, Phase.MITIGATION)

    def _rejoin(self, world: WorldModel, lookahead: float = 0.0) -> Optional[Command]:
        p = world.robot_pose
        target = Pose(p.x, self._detour[0], p.heading)
        if not _clear(world, target, lookahead):
            return None
        self._detour = None
        return Command(teleport=target)

    def handle_blocked_path(self, ctl: Controller, world: WorldModel) -> Command:
        """Something unrecorded blocks the lane: play a sound, wait, retry, then detour."""
        t = world.clock
        if self._retries < self.config.retries:
            self._retries += 1
            self.state.sound_events.append(t)
            self._wait_until = t + self.config.sound_wait
            return Command(velocity=0.0)
        self._retries = 0
        p = world.robot_pose
        if self._detour is None:
            # sidestep into the neighbouring lane and drive past the blocker
            lanes = ctl.plan.lanes
            nxt = plan_next_lane(ctl.state, ctl.plan)
            side = nxt if nxt is not None else (lanes[ctl.state.lane - 1] if ctl.state.lane > 0 else None)
            if side is not None:
                target = Pose(p.x, side.y, p.heading)
                step = self.state.speed / 10.0 * ctl.dt
                if _clear(world, target, step):
                    self._detour = (p.y, 0.0)
                    return Command(teleport=target)
        # no room to sidestep: give up on this lane
        self._detour = None
        cmd = ctl.turn(world)
        self._note_done(ctl, t)
        return cmd

    def _note_done(self, ctl: Controller, t: float) -> None:
        if ctl.state.phase == Phase.DONE and not self.completions:
            self.completions.append(t)


def _clear(world: WorldModel, pose: Pose, lookahead: float) -> bool:
    """True if ``pose`` and the next step from it both keep the crash distance."""
    return all(min_separation(world, p)[0] >= CRASH_THRESHOLD for p in (pose, pose.advanced(lookahead)))

import random

import pytest

from robosec.attack import AttackChannel, ConstantFuzzer, Fabrication
from robosec.controller import Phase
from robosec.remit import MITIGATION, NORMAL, MitigationState, Remit, RemitConfig, enter_mitigation, try_block_attacker
from robosec.scenario import with_overrides
from robosec.sensing import ProactiveThreshold
from robosec.shade import DetectionVerdict
from robosec.trial import run_trial

HIT = DetectionVerdict(True, "shade", 1.0)


def test_enter_mitigation():
    s = enter_mitigation(MitigationState(), HIT, 50.0)
    assert s.mode == MITIGATION and s.speed == pytest.approx(45.0)
    enter_mitigation(s, DetectionVerdict(True, "crv", 9.0), 50.0)
    assert len(s.transitions) == 1
    with pytest.raises(ValueError):
        enter_mitigation(MitigationState(), DetectionVerdict(False, None, 0.0), 50.0)


def test_block_attacker():
    ch = AttackChannel(model=Fabrication(ConstantFuzzer(60.0)))
    s = enter_mitigation(MitigationState(), HIT, 50.0)
    assert not try_block_attacker(s, ch, random.Random(0), 0.0)
    assert s.mode == MITIGATION and ch.compromised
    assert try_block_attacker(s, ch, random.Random(0), 1.0)
    assert s.mode == NORMAL and not ch.compromised and s.speed == 50.0


def test_map_turn_margin(cabinet_room, map_cabinet):
    remit = Remit(map_cabinet, RemitConfig())
    w = cabinet_room.build_world(0)
    from robosec.controller import Controller
    ctl = Controller(cabinet_room.controller, cabinet_room.lane_plan(), cabinet_room.sensor_mode, cabinet_room.tick)
    ctl.remit = remit
    remit.enter(HIT, 50.0)
    # place the sensor 28 cm from the wall: keep going
    from robosec.world import Pose
    w.robot_pose = Pose(17 + 28, 25, w.robot_pose.heading)
    assert ctl.tick(None, w).velocity == pytest.approx(4.5)
    w.robot_pose = Pose(17 + 24, 25, w.robot_pose.heading)
    assert ctl.tick(None, w).teleport is not None


def _mitigated(sc, hmap, seed=0, **kw):
    kw = {"attack": "fabrication", "detector": "shade", "mitigation": True, "hmap": hmap, **kw}
    return run_trial(sc, seed, **kw)


def test_mitigated_run_completes_once(cabinet_room, map_cabinet):
    rec = _mitigated(cabinet_room, map_cabinet)
    assert rec.completed and not rec.crashed and rec.completions == 1
    assert rec.sound_events == []


def test_block_success_returns_to_normal(cabinet_room, map_cabinet):
    rec = run_trial(cabinet_room, 0, attack="fabrication", detector="shade", mitigation=True, hmap=map_cabinet,
                    remit=RemitConfig(p_block=1.0))
    assert rec.completed and not rec.crashed
    # normal operation resumed at full speed: no slower than a clean run
    assert rec.running_time <= run_trial(cabinet_room, 0).running_time + 1.0


def _with_pet(sc, behavior):
    pet = {"id": "pet", "rect": [100, 50, 110, 68], "behavior": behavior}
    return with_overrides(sc, obstacles=sc.obstacles + [pet])


def test_transient_blocker_one_sound(cabinet_room, map_cabinet):
    stuck = _mitigated(_with_pet(cabinet_room, {"kind": "static"}), map_cabinet, mode=ProactiveThreshold(),
                       attack="suspension")
    first = stuck.sound_events[0]
    rec = _mitigated(_with_pet(cabinet_room, {"kind": "moves_out", "start_time": first + 0.5}), map_cabinet,
                     mode=ProactiveThreshold(), attack="suspension")
    assert len(rec.sound_events) == 1
    assert rec.completed and not rec.crashed


def test_permanent_blocker_detours(cabinet_room, map_cabinet):
    rec = _mitigated(_with_pet(cabinet_room, {"kind": "static"}), map_cabinet, mode=ProactiveThreshold(),
                     attack="suspension")
    assert len(rec.sound_events) == 5
    assert rec.completed and not rec.crashed
    clean = run_trial(cabinet_room, 0).cleaned
    # at most one lane (126 cm) left uncleaned, plus the usual map margin losses
    assert rec.cleaned >= clean - 126 - 40

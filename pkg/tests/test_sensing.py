import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robosec.attack import AttackChannel, ConstantFuzzer, Fabrication, Suspension
from robosec.sensing import (ALERT, NUMERIC, LatencyModel, Passive, ProactivePeriodic,
                             ProactiveThreshold, Sensor, SensorReading, deliver, sample)
from robosec.world import Command, Pose, WorldModel

WALLS = [(0, 0, 300, 0), (300, 0, 300, 200), (300, 200, 0, 200), (0, 200, 0, 0)]


def world_at(x, heading=0.0):
    return WorldModel(rooms=[(0, 0, 300, 200)], walls=list(WALLS), obstacles=[],
                      robot_pose=Pose(x, 100, heading))


def test_passive_reading_value_and_latency():
    w = world_at(300 - 17 - 150)
    r = sample(w, Passive(), random.Random(1))
    assert r.value == pytest.approx(150) and r.kind == NUMERIC
    assert 2 <= r.observed_latency <= 12


def test_threshold_mode_silent_above_alert():
    assert sample(world_at(300 - 17 - 80), ProactiveThreshold(20), random.Random(0)) is None


def test_threshold_alert_within_one_tick_of_crossing():
    w = world_at(300 - 17 - 30)
    rng = random.Random(0)
    first = None
    while first is None:
        r = sample(w, ProactiveThreshold(20), rng)
        if r is not None:
            first = (w.clock, r)
        w.step(0.1, Command(velocity=5.0))
    t, r = first
    assert r.kind == ALERT and r.is_alert
    # ground truth crosses 20 cm after 10 cm of travel at 5 cm/s
    assert abs(t - 2.0) <= 0.1 + 1e-9


def test_periodic_mode_reports_every_period():
    w = world_at(100)
    s = Sensor(ProactivePeriodic(1.0))
    got = []
    for _ in range(35):
        if s.sample(w, random.Random(0)) is not None:
            got.append(w.clock)
        w.step(0.1)
    assert got == pytest.approx([0.0, 1.0, 2.0, 3.0])


def test_mode_validation():
    with pytest.raises(ValueError):
        ProactiveThreshold(1.0)
    with pytest.raises(ValueError):
        ProactivePeriodic(0.0)
    with pytest.raises(ValueError):
        LatencyModel(genuine=(2, 250), via_network=(200, 250))


def reading(v, latency=5.0, mode=Passive(), kind=NUMERIC):
    return SensorReading(v, kind, 0.0, latency, mode)


def test_deliver_without_attack_is_identity():
    r = reading(150.0)
    assert deliver(r, None) is r
    assert deliver(r, AttackChannel(model=None), 0.0) is r


def test_fabrication_uses_network_latency():
    ch = AttackChannel(model=Fabrication(ConstantFuzzer(60.0)), rng=random.Random(2))
    out = deliver(reading(10.0), ch, 0.0)
    assert out.value == 60 and out.fabricated
    assert 200 <= out.observed_latency <= 250


def test_suspension_drops_alerts():
    ch = AttackChannel(model=Suspension())
    assert deliver(reading(19.0, mode=ProactiveThreshold(), kind=ALERT), ch, 1.0) is None
    assert ch.active_since == 1.0


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 10_000), v=st.floats(2, 250))
def test_latency_fingerprint_separates_paths(seed, v):
    rng = random.Random(seed)
    genuine = sample(world_at(300 - 17 - v), Passive(), rng)
    assert 2 <= genuine.observed_latency <= 12
    ch = AttackChannel(model=Fabrication(ConstantFuzzer(v)), rng=rng)
    forged = deliver(genuine, ch, 0.0)
    assert 200 <= forged.observed_latency <= 250
    assert genuine.value == pytest.approx(v, abs=1e-9)

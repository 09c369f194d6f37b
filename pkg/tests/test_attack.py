import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import reversals
from robosec.attack import (PACKETS_PER_INTERCEPT, SUSPENSION_PACKETS, AttackChannel, ConstantFuzzer,
                            Fabrication, RandomTimeFuzzer, Suspension, VolatileFuzzer,
                            random_attack_plan, volatile_stream)
from robosec.controller import VolatilityFilter
from robosec.sensing import ALERT, NUMERIC, Passive, ProactiveThreshold, SensorReading


def reading(v, t=0.0, kind=NUMERIC, mode=Passive()):
    return SensorReading(v, kind, t, 5.0, mode)


def test_channel_identity_when_not_live():
    for ch in (AttackChannel(model=None), AttackChannel(model=Suspension(), compromised=False),
               AttackChannel(model=Suspension(), armed=False)):
        r = reading(42.0)
        assert ch.intercept(r, 0.0) is r
        assert ch.active_since is None


def test_constant_substitution():
    ch = AttackChannel(model=Fabrication(ConstantFuzzer(60.0)))
    assert ch.intercept(reading(10.0), 0.0).value == 60


def test_suspension_never_fabricates_and_fabrication_never_drops():
    sus = AttackChannel(model=Suspension())
    fab = AttackChannel(model=Fabrication(ConstantFuzzer(60.0)))
    for t in range(20):
        assert sus.intercept(reading(float(t + 10), t), t) is None
        assert fab.intercept(reading(float(t + 10), t), t) is not None


def test_packet_emission():
    got = []
    sink = lambda t, d, s, p: got.append(p)
    sus = AttackChannel(model=Suspension(), packet_sink=sink)
    for t in range(5):
        sus.intercept(None, t)
    assert got.count("suspend") == SUSPENSION_PACKETS
    fab = AttackChannel(model=Fabrication(ConstantFuzzer(60.0)), packet_sink=sink)
    for t in range(5):
        fab.intercept(reading(10.0), t)
    assert got.count("fabricate") == 5 * PACKETS_PER_INTERCEPT


def test_volatile_values_in_range_and_jumpy():
    vals = list(itertools.islice(volatile_stream(random.Random(0)), 2000))
    assert all(2 <= v <= 400 for v in vals)
    steps = [abs(b - a) for a, b in zip(vals, vals[1:])]
    assert sum(s > 100 for s in steps) / len(steps) > 0.4


def test_volatile_windows_always_rejected():
    rejected = total = 0
    for seed in range(20):
        vals = list(itertools.islice(volatile_stream(random.Random(seed)), 505))
        for k in range(len(vals) - 5):
            w = vals[k:k + 6]
            assert reversals(w, 30) >= 3
            f = VolatilityFilter()
            rejected += not all(f.push(v) for v in w)
            total += 1
    assert total == 10_000 and rejected == total


def test_volatile_fuzzer_is_finite():
    vf = VolatileFuzzer(random.Random(1), length=3)
    out = [vf.substitute(reading(50.0), 0.1 * k) for k in range(5)]
    assert out[3:] == [None, None] and all(o is not None for o in out[:3])
    assert vf.substitute(reading(19.0, kind=ALERT, mode=ProactiveThreshold()), 0.0) is None


def test_random_plan_and_hold():
    fire, delta = random_attack_plan(random.Random(0), 100.0)
    assert 0 <= fire <= 100 and delta == 50
    with pytest.raises(ValueError):
        random_attack_plan(random.Random(0), 0.0)
    f = RandomTimeFuzzer(fire_time=5.0, hold=1.0)
    assert f.substitute(reading(10.0), 4.9) is None
    assert f.substitute(reading(10.0), 5.0) == 60
    assert f.substitute(reading(10.0), 6.0) is None
    # firing after the trial ended has no effect
    late = RandomTimeFuzzer(fire_time=1e6)
    assert all(late.substitute(reading(30.0), t / 10) is None for t in range(1000))


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), length=st.floats(1, 500))
def test_random_fire_time_within_trial(seed, length):
    fire, _ = random_attack_plan(random.Random(seed), length)
    assert 0 <= fire <= length

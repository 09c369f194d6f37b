import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import lsq_slope, reversals
from robosec.robofuzz import (ComponentInventory, FuzzFunction, FuzzPlan, FuzzTarget, FuzzTuple,
                              RoboFuzz, StateSnapshot, Trend, build_plan, gamma_for, observe, run,
                              should_trigger)
from robosec.sensing import NUMERIC, Passive, SensorReading
from robosec.trial import run_trial


@pytest.mark.parametrize("values,trend", [
    ([80, 75, 70, 65, 60], Trend.GRADUAL_DECREASE),
    ([80, 70, 58, 44, 28], Trend.SHARP_DECREASE),
    ([30, 28, 26, 180, 178], Trend.JUMP_THEN_DECREASE),
    ([30, 29.5, 29, 28.5, 180], Trend.SUDDEN_INCREASE),
    ([50, 50, 50, 50, 50], Trend.FLAT),
    ([80, 75], Trend.FLAT),
])
def test_observe_classes(values, trend):
    assert observe(values).trend == trend


def test_observe_slope_matches_oracle():
    vals = [80, 70, 58, 44, 28]
    assert lsq_slope(list(range(5)), vals) < -1.5 * 5


def snap(v, trend, anchor=None):
    return StateSnapshot("Forward", v, trend, 0.0, anchor)


def test_should_trigger_examples():
    crash = build_plan(FuzzTarget.CRASH_ROBOT)
    reduce = build_plan("ReduceEfficacy")
    assert should_trigger(crash, snap(19, Trend.GRADUAL_DECREASE))
    assert not should_trigger(crash, snap(150, Trend.GRADUAL_DECREASE))
    assert should_trigger(crash, snap(150, Trend.SHARP_DECREASE))
    assert should_trigger(reduce, snap(180, Trend.JUMP_THEN_DECREASE))
    assert should_trigger(reduce, snap(180, Trend.SUDDEN_INCREASE))
    assert not should_trigger(reduce, snap(19, Trend.GRADUAL_DECREASE))
    assert not should_trigger(crash, snap(180, Trend.JUMP_THEN_DECREASE))


def test_gamma_examples():
    crash = build_plan(FuzzTarget.CRASH_ROBOT).tuples[0].f
    reduce = build_plan(FuzzTarget.REDUCE_EFFICACY).tuples[0].f
    assert gamma_for(crash, snap(19, Trend.GRADUAL_DECREASE), 1.0) == pytest.approx(24)
    assert gamma_for(reduce, snap(180, Trend.JUMP_THEN_DECREASE), 2.0) == pytest.approx(170)
    # with a recorded pre-jump line the wall keeps approaching from there
    assert gamma_for(reduce, snap(243, Trend.SUDDEN_INCREASE, anchor=63), 2.0) == pytest.approx(53)


@settings(max_examples=200, deadline=None)
@given(v=st.floats(2, 400), t=st.floats(0, 1000),
       target=st.sampled_from(list(FuzzTarget)), trend=st.sampled_from(list(Trend)))
def test_gamma_in_sensor_range(v, t, target, trend):
    f = build_plan(target).tuples[0].f
    assert 2 <= gamma_for(f, snap(v, trend, anchor=v), t) <= 400


def test_plan_validation():
    f = FuzzFunction("only_gradual", frozenset({Trend.GRADUAL_DECREASE}), 5.0)
    with pytest.raises(ValueError):
        FuzzPlan(FuzzTarget.CRASH_ROBOT, frozenset({Trend.SHARP_DECREASE}),
                 frozenset({"distance_sensor"}), (FuzzTuple(None, None, f),))
    with pytest.raises(ValueError):
        FuzzTuple(10.0, 500.0, f)
    with pytest.raises(ValueError):
        ComponentInventory(sensors=())


def test_empty_plan_never_triggers(door_rooms):
    f = build_plan(FuzzTarget.CRASH_ROBOT).tuples[0].f
    empty = FuzzPlan(FuzzTarget.CRASH_ROBOT, frozenset(), frozenset({"distance_sensor"}),
                     (FuzzTuple(None, None, f),))
    rec = run(empty, door_rooms, seed=0)
    assert not rec.success and not rec.crashed
    assert not any(r["fabricated"] for r in rec.trace)


def test_identity_before_trigger():
    fz = RoboFuzz(build_plan(FuzzTarget.CRASH_ROBOT))
    for k in range(50):
        r = SensorReading(200.0 - 0.5 * k, NUMERIC, 0.1 * k, 5.0, Passive())
        assert fz.substitute(r, 0.1 * k) is None
    assert not fz.triggered


@pytest.mark.parametrize("target", list(FuzzTarget))
def test_streams_are_rational(door_rooms, target):
    """Every delivered series under RoboFuzz passes the controller's filter."""
    for seed in range(10):
        rec = run_trial(door_rooms, seed, fuzzer="robofuzz", target=target)
        assert rec.success and rec.rejected == 0
        delivered = [r["delivered"] for r in rec.trace if r["delivered"] is not None]
        for k in range(len(delivered) - 5):
            assert reversals(delivered[k:k + 6], 30) < 3
        # the channel is an identity until the first fabricated reading
        first = next(i for i, r in enumerate(rec.trace) if r["fabricated"])
        assert all(r["delivered"] == r["genuine"] for r in rec.trace[:first])

"""Goal tokens, reward linearity, and autonomous goal synthesis."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ranorch.agent.rewards import (
    GoalToken,
    auto_goal,
    extrinsic_reward,
    fulfillment,
    goal_from_intent,
    goal_satisfied,
    intrinsic_reward,
    signed_delta,
    sla_violation_load,
)
from ranorch.config import SliceSpec
from ranorch.intents import parse_intent

SPECS = (
    SliceSpec(0, "eMBB", throughput_req=1000.0, latency_req=10.0, loss_req=0.1),
    SliceSpec(1, "URLLC", throughput_req=100.0, latency_req=2.0, loss_req=0.01),
)


def test_goal_target_computation():
    goal = GoalToken("throughput", 0.10, +1, baseline=100.0)
    assert goal.target == pytest.approx(110.0)
    down = GoalToken("latency", 0.20, -1, baseline=10.0)
    assert down.target == pytest.approx(8.0)


def test_goal_satisfied_inclusive():
    goal = GoalToken("throughput", 0.25, +1, baseline=100.0)
    assert goal_satisfied(goal, 125.0)
    assert not goal_satisfied(goal, 124.999)
    down = GoalToken("latency", 0.25, -1, baseline=16.0)
    assert goal_satisfied(down, 12.0)
    assert not goal_satisfied(down, 12.01)


def test_fulfillment_clipped_fraction():
    goal = GoalToken("throughput", 0.10, +1, baseline=100.0)
    assert fulfillment(goal, 105.0) == pytest.approx(0.5)
    assert fulfillment(goal, 200.0) == 1.0
    assert fulfillment(goal, 90.0) == 0.0


def test_goal_from_intent():
    goal = goal_from_intent(parse_intent("increase throughput by 20%"), 500.0)
    assert goal.metric == "throughput" and goal.delta == pytest.approx(0.2)
    assert goal.direction == +1
    goal = goal_from_intent(parse_intent("reduce delay by 10%"), 8.0)
    assert goal.metric == "latency" and goal.direction == -1
    with pytest.raises(ValueError):
        goal_from_intent(parse_intent("boost slice embb by 1 rbg"), 1.0)


def test_intrinsic_reward_frozen_case():
    # 1.0*0.5 + 2.0*0.5 - 1.0*0.1 - 0.1*0.0 = 1.4
    r = intrinsic_reward({"throughput": 0.5, "latency": 0.5},
                         {"throughput": 1.0, "latency": 2.0},
                         v_sla=0.1, action_cost=0.0,
                         sla_penalty=1.0, cost_penalty=0.1)
    assert r == pytest.approx(1.4)
    # 0 - 1.0*0.8 - 0.1*2.0 = -1.0
    r = intrinsic_reward({}, {}, v_sla=0.8, action_cost=2.0)
    assert r == pytest.approx(-1.0)


@given(
    d=st.floats(-1, 1), w=st.floats(0, 5), v=st.floats(0, 3),
    c=st.floats(0, 3), lam=st.floats(0, 2), eta=st.floats(0, 1),
)
def test_intrinsic_reward_exactly_linear(d, w, v, c, lam, eta):
    r = intrinsic_reward({"throughput": d}, {"throughput": w}, v, c, lam, eta)
    assert r == pytest.approx(w * d - lam * v - eta * c, abs=1e-12)
    doubled = intrinsic_reward({"throughput": d}, {"throughput": 2 * w}, v, c, lam, eta)
    assert doubled - r == pytest.approx(w * d, abs=1e-9)


def test_intrinsic_reward_rejects_negative_loads():
    with pytest.raises(ValueError):
        intrinsic_reward({}, {}, v_sla=-0.1, action_cost=0.0)


def test_signed_delta_orientation():
    assert signed_delta("throughput", 100.0, 120.0) == pytest.approx(20.0)
    assert signed_delta("latency", 10.0, 8.0) == pytest.approx(2.0)
    assert signed_delta("loss", 0.1, 0.2) == pytest.approx(-0.1)


def test_extrinsic_reward_window_sum():
    stream = [1.0] * 30
    assert extrinsic_reward(stream, horizon=20) == pytest.approx(20.0)
    assert extrinsic_reward([2.0, 3.0], horizon=20) == pytest.approx(5.0)
    with pytest.raises(ValueError):
        extrinsic_reward(stream, horizon=0)


def test_sla_violation_load_clipped_sum():
    kpis = {0: {"throughput": 500.0, "latency": 30.0, "loss": 0.0},
            1: {"throughput": 200.0, "latency": 1.0, "loss": 0.0}}
    v = sla_violation_load(kpis, SPECS)
    # slice 0: tput gap 0.5 + latency gap clipped to 1.0; slice 1 clean.
    assert v == pytest.approx(1.5)


def test_auto_goal_picks_largest_deficit():
    kpis = {0: {"throughput": 900.0, "latency": 5.0, "loss": 0.0},   # 10% short
            1: {"throughput": 20.0, "latency": 1.0, "loss": 0.0}}    # 80% short
    goal = auto_goal(kpis, SPECS)
    assert goal.metric == "throughput"
    assert goal.baseline == pytest.approx(20.0)
    assert goal.delta == pytest.approx(0.8)


def test_auto_goal_none_when_all_met():
    kpis = {0: {"throughput": 2000.0, "latency": 5.0, "loss": 0.0},
            1: {"throughput": 200.0, "latency": 1.0, "loss": 0.0}}
    assert auto_goal(kpis, SPECS) is None


def test_goal_token_validates():
    with pytest.raises(ValueError):
        GoalToken("happiness", 0.1, +1)
    with pytest.raises(ValueError):
        GoalToken("throughput", 0.1, 0)

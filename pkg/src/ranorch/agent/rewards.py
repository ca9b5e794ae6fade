"""Goal tokens, intrinsic/extrinsic rewards, and autonomous goal synthesis."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ranorch.intents import INTENT_METRIC, KPI_DIRECTION, Intent

# sigma_m: +1 when larger KPI values are better.
METRIC_SIGN = {
    "throughput": +1,
    "latency": -1,
    "loss": -1,
    "energy_efficiency": +1,
    "longterm_throughput": +1,
    "fifth_pct_throughput": +1,
}


@dataclass(frozen=True)
class GoalToken:
    """Conditioning goal: metric, relative delta target, and sign."""

    metric: str
    delta: float          # desired relative improvement, e.g. 0.10
    direction: int        # METRIC_SIGN of the metric
    baseline: float = 0.0

    def __post_init__(self) -> None:
        if self.metric not in METRIC_SIGN:
            raise ValueError(f"unknown goal metric {self.metric!r}")
        if self.direction not in (-1, +1):
            raise ValueError("direction must be +/-1")

    @property
    def target(self) -> float:
        """Absolute target from the baseline and the signed relative delta."""
        return self.baseline * (1.0 + self.direction * self.delta)


def goal_from_intent(intent: Intent, baseline: float) -> GoalToken:
    if intent.is_slice_boost:
        raise ValueError("slice-boost intents do not carry a KPI goal")
    delta = abs(intent.delta) / 100.0 if intent.is_percent else (
        abs(intent.delta) / baseline if baseline > 0 else 0.0
    )
    sign = KPI_DIRECTION[{v: k for k, v in INTENT_METRIC.items()}[intent.metric]]
    return GoalToken(intent.metric, delta, sign, baseline)


def goal_satisfied(goal: GoalToken, kpi_value: float) -> bool:
    """sign * (KPI - target) >= 0."""
    return goal.direction * (kpi_value - goal.target) >= 0.0


def fulfillment(goal: GoalToken, kpi_value: float) -> float:
    """Fraction of the goal delta achieved, clipped to [0, 1]."""
    if goal.baseline == 0 or goal.delta == 0:
        return 1.0 if goal_satisfied(goal, kpi_value) else 0.0
    achieved = goal.direction * (kpi_value - goal.baseline) / (goal.baseline * goal.delta)
    return float(min(max(achieved, 0.0), 1.0))


# ------------------------------------------------------------------ rewards


def sla_violation_load(per_slice: dict[int, dict[str, float]], specs) -> float:
    """Sum over slices and constraints of clipped normalized violations."""
    total = 0.0
    for spec in specs:
        kpis = per_slice.get(spec.slice_id, {})
        for name, (direction, bound) in spec.constraints.items():
            value = kpis.get(name)
            if value is None or bound <= 0:
                continue
            gap = (bound - value) / bound if direction == "ge" else (value - bound) / bound
            total += min(max(gap, 0.0), 1.0)
    return total


def intrinsic_reward(
    kpi_deltas: dict[str, float],
    weights: dict[str, float],
    v_sla: float,
    action_cost: float,
    sla_penalty: float = 1.0,
    cost_penalty: float = 0.1,
) -> float:
    """sum_m w_m * dKPI_m - lambda * V_SLA - eta * c(a); exactly linear in
    the weights and penalties."""
    if v_sla < 0 or action_cost < 0:
        raise ValueError("violation load and action cost must be nonnegative")
    gain = sum(weights.get(m, 0.0) * d for m, d in kpi_deltas.items())
    return gain - sla_penalty * v_sla - cost_penalty * action_cost


def signed_delta(metric: str, previous: float, current: float) -> float:
    """KPI delta oriented so positive means improvement."""
    return METRIC_SIGN[metric] * (current - previous)


def extrinsic_reward(intrinsic_stream, horizon: int = 20) -> float:
    """Sum of the last `horizon` intrinsic rewards."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    stream = list(intrinsic_stream)
    return float(sum(stream[-horizon:]))


# ------------------------------------------------------------------ auto goals


def auto_goal(per_slice: dict[int, dict[str, float]], specs,
              delta: float = 0.1) -> GoalToken | None:
    """Goal for the largest normalized SLA deficit, or None when all met.

    The metric keeps its slice-level name; the baseline is the violating
    slice's current value.
    """
    worst: tuple[float, str, float] | None = None
    for spec in specs:
        kpis = per_slice.get(spec.slice_id, {})
        for name, (direction, bound) in spec.constraints.items():
            value = kpis.get(name)
            if value is None or bound <= 0:
                continue
            gap = (bound - value) / bound if direction == "ge" else (value - bound) / bound
            gap = min(max(gap, 0.0), 1.0)
            if gap > 0 and (worst is None or gap > worst[0]):
                worst = (gap, name, value)
    if worst is None:
        return None
    gap, metric, value = worst
    direction = METRIC_SIGN.get(metric, +1)
    baseline = value if value > 0 else 1e-9
    return GoalToken(metric, max(delta, gap), direction, baseline)

"""Compact goal-conditioned orchestration environment.

Used to pretrain and evaluate the hierarchical decision policy without
dragging the full simulator into every gradient step. Actions map to the
decision-capable modules; two regimes permute the action-effect table so a
policy frozen on one regime generalizes poorly to the other.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ranorch.agent.rewards import GoalToken, METRIC_SIGN, fulfillment, goal_satisfied

METRICS = ("throughput", "latency", "loss", "energy_efficiency")

# Action vocabulary: (name, cost). Index order is the policy's action space.
ACTIONS: tuple[tuple[str, float], ...] = (
    ("rag_query", 0.0),
    ("inter_slice", 1.0),
    ("traffic_steer", 1.0),
    ("power_control", 1.0),
    ("self_heal", 1.0),
    ("noop", 0.0),
)
NUM_ACTIONS = len(ACTIONS)
ACTION_COSTS = np.array([c for _, c in ACTIONS])

# Per-regime multiplicative effects: action -> metric -> factor.
_EFFECTS_A: dict[str, dict[str, float]] = {
    "inter_slice": {"throughput": 1.06, "latency": 0.97},
    "traffic_steer": {"throughput": 1.09, "loss": 0.95, "energy_efficiency": 0.98},
    "power_control": {"energy_efficiency": 1.08, "throughput": 0.99},
    "self_heal": {"loss": 0.90, "latency": 0.95, "throughput": 1.01},
}
# Regime B swaps the throughput and energy specialists and inverts steer.
_EFFECTS_B: dict[str, dict[str, float]] = {
    "inter_slice": {"latency": 0.90, "throughput": 1.01, "loss": 0.97},
    "traffic_steer": {"throughput": 0.94, "energy_efficiency": 1.08},
    "power_control": {"throughput": 1.09, "energy_efficiency": 0.97},
    "self_heal": {"loss": 0.90, "latency": 0.97},
}

STATE_DIM = len(METRICS) + len(METRICS) + 2   # kpis, goal one-hot, drift, budget


@dataclass
class ToyOrchestrationEnv:
    """Episodic env: reach the goal's relative KPI target within the horizon."""

    regime: str = "A"
    horizon: int = 6
    budget: float = 4.0
    noise: float = 0.005
    seed: int = 0
    _rng: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.regime not in ("A", "B"):
            raise ValueError("regime must be 'A' or 'B'")
        self._rng = np.random.Generator(np.random.PCG64(self.seed))
        self._effects = _EFFECTS_A if self.regime == "A" else _EFFECTS_B
        self.kpis: dict[str, float] = {}
        self.goal: GoalToken | None = None
        self.t = 0
        self.spent = 0.0
        self.drift = False

    # ------------------------------------------------------------------ episode

    def reset(self, goal_metric: str | None = None, delta: float = 0.05) -> np.ndarray:
        base = {"throughput": 100.0, "latency": 10.0, "loss": 0.05, "energy_efficiency": 50.0}
        self.kpis = {m: v * float(self._rng.uniform(0.95, 1.05)) for m, v in base.items()}
        if goal_metric is None:
            goal_metric = METRICS[int(self._rng.integers(len(METRICS)))]
        self.goal = GoalToken(goal_metric, delta, METRIC_SIGN[goal_metric],
                              baseline=self.kpis[goal_metric])
        self.t = 0
        self.spent = 0.0
        self.drift = bool(self._rng.random() < 0.3)
        return self.state()

    def state(self) -> np.ndarray:
        base = {"throughput": 100.0, "latency": 10.0, "loss": 0.05, "energy_efficiency": 50.0}
        kvec = [self.kpis[m] / base[m] for m in METRICS]
        gvec = [1.0 if self.goal and self.goal.metric == m else 0.0 for m in METRICS]
        return np.array(kvec + gvec + [1.0 if self.drift else 0.0,
                                       (self.budget - self.spent) / self.budget])

    def safe_mask(self) -> np.ndarray:
        """A_safe: self-heal only under drift; costed actions need budget."""
        mask = np.ones(NUM_ACTIONS, dtype=bool)
        if not self.drift:
            mask[self._action_index("self_heal")] = False
        remaining = self.budget - self.spent
        for i, (_, cost) in enumerate(ACTIONS):
            if cost > remaining:
                mask[i] = False
        return mask

    @staticmethod
    def _action_index(name: str) -> int:
        return next(i for i, (n, _) in enumerate(ACTIONS) if n == name)

    def step(self, action: int) -> tuple[np.ndarray, float, bool]:
        if self.goal is None:
            raise RuntimeError("call reset() before step()")
        if not 0 <= action < NUM_ACTIONS:
            raise ValueError(f"unknown action {action}")
        name, cost = ACTIONS[action]
        if not self.safe_mask()[action]:
            raise ValueError(f"unsafe action {name!r} in current state")
        self.spent += cost
        prev = self.kpis[self.goal.metric]
        for metric, factor in self._effects.get(name, {}).items():
            self.kpis[metric] *= factor
        if name == "self_heal":
            self.drift = False
        for metric in METRICS:
            self.kpis[metric] *= float(1.0 + self._rng.normal(0.0, self.noise))
        self.t += 1
        curr = self.kpis[self.goal.metric]
        gain = self.goal.direction * (curr - prev) / max(abs(self.goal.baseline), 1e-9)
        reward = gain - 0.05 * cost - (0.1 if self.drift else 0.0)
        done = self.t >= self.horizon or goal_satisfied(self.goal, curr)
        return self.state(), float(reward), done

    # ------------------------------------------------------------------ outcome

    def achieved_delta(self) -> float:
        assert self.goal is not None
        value = self.kpis[self.goal.metric]
        return float(self.goal.direction * (value - self.goal.baseline)
                     / max(abs(self.goal.baseline), 1e-9))

    def satisfied(self) -> bool:
        assert self.goal is not None
        return goal_satisfied(self.goal, self.kpis[self.goal.metric])

    def goal_fulfillment(self) -> float:
        assert self.goal is not None
        return fulfillment(self.goal, self.kpis[self.goal.metric])

"""Hierarchical tabular Q-learning used to seed the decision transformer.

A meta-controller proposes the goal metric from observed KPI deficits; the
controller learns (goal, drift, budget) -> module action values. Trained
episodes double as demonstration trajectories for offline pretraining.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ranorch.agent.replay import EpisodeTrajectory, TrajStep
from ranorch.agent.rewards import GoalToken
from ranorch.agent.toyenv import METRICS, NUM_ACTIONS, ToyOrchestrationEnv


class DivergenceError(RuntimeError):
    """Q-values left the trusted range; training aborted."""


def _bucket(env: ToyOrchestrationEnv) -> tuple:
    remaining = int(env.budget - env.spent)
    return (env.goal.metric, env.drift, min(remaining, 4))


@dataclass
class MetaController:
    """Picks the goal metric with the largest normalized deficit."""

    base: dict[str, float] = field(default_factory=lambda: {
        "throughput": 100.0, "latency": 10.0, "loss": 0.05, "energy_efficiency": 50.0,
    })

    def propose(self, kpis: dict[str, float]) -> str:
        def deficit(metric: str) -> float:
            sign = 1.0 if metric in ("throughput", "energy_efficiency") else -1.0
            return sign * (self.base[metric] - kpis[metric]) / self.base[metric]
        return max(METRICS, key=lambda m: (deficit(m), m))


@dataclass
class HdqnTrainer:
    gamma: float = 0.9
    lr: float = 0.2
    epsilon: float = 0.2
    q_max: float = 100.0
    seed: int = 0
    q: dict[tuple, np.ndarray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not 0 < self.gamma < 1:
            raise ValueError("gamma must be in (0, 1)")
        self._rng = np.random.Generator(np.random.PCG64(self.seed))

    def _q_row(self, key: tuple) -> np.ndarray:
        if key not in self.q:
            self.q[key] = np.zeros(NUM_ACTIONS)
        return self.q[key]

    def _act(self, env: ToyOrchestrationEnv, greedy: bool = False) -> int:
        mask = env.safe_mask()
        valid = np.flatnonzero(mask)
        if not greedy and self._rng.random() < self.epsilon:
            return int(valid[self._rng.integers(valid.size)])
        row = self._q_row(_bucket(env)).copy()
        row[~mask] = -np.inf
        return int(np.argmax(row))

    def train_episode(self, env: ToyOrchestrationEnv,
                      goal_metric: str | None = None) -> tuple[EpisodeTrajectory, float]:
        """One Q-learning episode; returns (trajectory, episode return)."""
        state = env.reset(goal_metric)
        steps: list[TrajStep] = []
        total = 0.0
        anchor = -1
        while True:
            key = _bucket(env)
            action = self._act(env)
            next_state, reward, done = env.step(action)
            total += reward
            row = self._q_row(key)
            if done:
                target = reward
            else:
                nrow = self._q_row(_bucket(env)).copy()
                nrow[~env.safe_mask()] = -np.inf
                target = reward + self.gamma * float(np.max(nrow))
            row[action] += self.lr * (target - row[action])
            if abs(row[action]) > self.q_max:
                raise DivergenceError(f"Q[{key}][{action}] = {row[action]:.1f}")
            steps.append(TrajStep(state, action, anchor, reward, next_state))
            anchor = action
            state = next_state
            if done:
                break
        goal = env.goal
        assert goal is not None
        traj = EpisodeTrajectory(
            goal=GoalToken(goal.metric, goal.delta, goal.direction, goal.baseline),
            steps=tuple(steps),
            achieved_delta=env.achieved_delta(),
            fulfillment=env.goal_fulfillment(),
        )
        return traj, total

    def train(self, env: ToyOrchestrationEnv, episodes: int,
              meta: MetaController | None = None
              ) -> tuple[list[EpisodeTrajectory], list[float]]:
        """Train for `episodes`; returns (demonstrations, per-episode returns)."""
        demos: list[EpisodeTrajectory] = []
        returns: list[float] = []
        for _ in range(episodes):
            goal_metric = None
            if meta is not None and demos:
                goal_metric = meta.propose(env.kpis)
            traj, total = self.train_episode(env, goal_metric)
            demos.append(traj)
            returns.append(total)
        return demos, returns


def quartile_improvement(returns: list[float]) -> tuple[float, float]:
    """(mean of first quartile, mean of last quartile) of episode returns."""
    k = max(len(returns) // 4, 1)
    return float(np.mean(returns[:k])), float(np.mean(returns[-k:]))

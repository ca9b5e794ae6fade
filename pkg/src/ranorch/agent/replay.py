"""Episode trajectories, FIFO replay with goal relabeling."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ranorch.agent.rewards import GoalToken


class ReplayError(ValueError):
    pass


@dataclass(frozen=True)
class TrajStep:
    state: np.ndarray            # feature vector at decision time
    action: int
    anchor: int                  # action id of the sampled anchor, -1 = null
    reward: float                # intrinsic reward observed for this step
    next_state: np.ndarray


@dataclass(frozen=True)
class EpisodeTrajectory:
    goal: GoalToken
    steps: tuple[TrajStep, ...]
    achieved_delta: float        # realized signed relative KPI change
    fulfillment: float = 0.0
    relabeled: bool = False

    def __post_init__(self) -> None:
        if not self.steps:
            raise ReplayError("episode must hold at least one step")
        for a, b in zip(self.steps, self.steps[1:]):
            if not np.array_equal(a.next_state, b.state):
                raise ReplayError("episode states must chain")

    @property
    def length(self) -> int:
        return len(self.steps)


def relabel_goals(episode: EpisodeTrajectory) -> EpisodeTrajectory:
    """Hindsight relabeling: the goal delta becomes the achieved delta.

    Idempotent; an already-relabeled episode is returned unchanged.
    """
    if episode.relabeled:
        return episode
    achieved = max(episode.achieved_delta, 0.0)
    goal = replace(episode.goal, delta=achieved)
    return replace(episode, goal=goal, fulfillment=1.0 if achieved > 0 else episode.fulfillment,
                   relabeled=True)


class ReplayBuffer:
    """Bounded FIFO of episodes; insertion past capacity evicts the oldest."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ReplayError("capacity must be >= 1")
        self.capacity = capacity
        self._episodes: list[EpisodeTrajectory] = []
        self._inserted = 0

    def __len__(self) -> int:
        return len(self._episodes)

    @property
    def episodes(self) -> tuple[EpisodeTrajectory, ...]:
        return tuple(self._episodes)

    def insert(self, episode: EpisodeTrajectory) -> EpisodeTrajectory | None:
        """Append; returns the evicted episode when the buffer was full."""
        evicted = None
        if len(self._episodes) >= self.capacity:
            evicted = self._episodes.pop(0)
        self._episodes.append(episode)
        self._inserted += 1
        return evicted

    def sample(self, count: int, rng: np.random.Generator) -> list[EpisodeTrajectory]:
        if not self._episodes:
            raise ReplayError("cannot sample from an empty buffer")
        idx = rng.integers(0, len(self._episodes), size=count)
        return [self._episodes[i] for i in idx]

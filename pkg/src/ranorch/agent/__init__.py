from ranorch.agent.graph import AgentGraph, TraceViolation, validate_trace
from ranorch.agent.rewards import (
    GoalToken,
    auto_goal,
    extrinsic_reward,
    goal_satisfied,
    intrinsic_reward,
    sla_violation_load,
)
from ranorch.agent.replay import EpisodeTrajectory, ReplayBuffer, TrajStep, relabel_goals

__all__ = [
    "AgentGraph",
    "TraceViolation",
    "validate_trace",
    "GoalToken",
    "auto_goal",
    "extrinsic_reward",
    "goal_satisfied",
    "intrinsic_reward",
    "sla_violation_load",
    "EpisodeTrajectory",
    "ReplayBuffer",
    "TrajStep",
    "relabel_goals",
]

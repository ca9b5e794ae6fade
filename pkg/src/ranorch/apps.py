"""Parameterized actuator models for the network application pool and the
team-learning context passed between the scheduling and app modules.

Effect magnitudes are scenario-config coefficients giving consistent,
monotone KPI responses; they are not learned physics.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class AppError(ValueError):
    pass


@dataclass(frozen=True)
class AppDescriptor:
    app_id: str
    # Signed KPI effect strengths: +1 pushes the metric up.
    effect_profile: dict[str, float]
    cost: float = 1.0
    # Parameter schema: name -> (min, max).
    schema: dict[str, tuple[float, float]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.cost < 0:
            raise AppError("cost must be nonnegative")
        if not self.effect_profile:
            raise AppError("effect profile must be non-empty")

    def validate_params(self, params: dict[str, float]) -> None:
        for name, value in params.items():
            if name not in self.schema:
                raise AppError(f"{self.app_id}: unknown parameter {name!r}")
            lo, hi = self.schema[name]
            if not lo <= value <= hi:
                raise AppError(f"{self.app_id}: {name}={value} outside [{lo}, {hi}]")


APP_CATALOG: dict[str, AppDescriptor] = {
    "steer": AppDescriptor(
        "steer",
        {"throughput": +1.0, "latency": -0.6, "loss": -0.4},
        schema={"fraction": (0.0, 1.0)},
    ),
    "sleep": AppDescriptor(
        "sleep",
        {"energy_efficiency": +1.0, "throughput": -0.6, "latency": +0.4},
        schema={"cell": (0, 32)},
    ),
    "power": AppDescriptor(
        "power",
        {"energy_efficiency": +0.8, "throughput": -0.2},
        schema={"scale": (0.25, 2.0)},
    ),
    "beam": AppDescriptor(
        "beam",
        {"throughput": +0.8, "latency": -0.2, "energy_efficiency": -0.3},
        schema={"boost": (0.0, 1.0), "num_ues": (0, 64)},
    ),
    "handover": AppDescriptor(
        "handover",
        {"loss": -0.8, "throughput": +0.3, "energy_efficiency": -0.2},
        schema={"offset": (-2.0, 2.0)},
    ),
}


@dataclass(frozen=True)
class EffectDelta:
    """Deterministic state mutation produced by one app invocation."""

    app_id: str
    se_scale: np.ndarray | float = 1.0        # per-UE or scalar multiplier
    arrival_scale: np.ndarray | float = 1.0
    power_scale: float = 1.0
    extra_power_w: float = 0.0
    cell_changes: tuple[tuple[int, bool], ...] = ()

    def is_identity(self) -> bool:
        se_id = np.all(np.asarray(self.se_scale) == 1.0)
        ar_id = np.all(np.asarray(self.arrival_scale) == 1.0)
        return bool(
            se_id and ar_id and self.power_scale == 1.0
            and self.extra_power_w == 0.0 and not self.cell_changes
        )


def effect_delta(state, app: AppDescriptor, params: dict[str, float]) -> EffectDelta:
    """Pure computation of the state delta for (state, app, params)."""
    app.validate_params(params)
    buffers = getattr(state, "buffers", None)
    num_ues = len(buffers) if buffers is not None else len(state.buf)
    if app.app_id == "steer":
        f = params.get("fraction", 0.2)
        return EffectDelta("steer", se_scale=1.0 + 0.3 * f,
                           arrival_scale=1.0, power_scale=1.0)
    if app.app_id == "sleep":
        cell = int(params.get("cell", 1))
        active = state.cells_active if hasattr(state, "cells_active") else None
        if active is not None and active.sum() <= 1 and active[cell]:
            raise AppError("cannot sleep the last active cell")
        # Displaced neighbor-cell load lands on the remaining cells.
        return EffectDelta("sleep", arrival_scale=1.1, cell_changes=((cell, False),))
    if app.app_id == "power":
        scale = params.get("scale", 1.0)
        if scale == 1.0:
            return EffectDelta("power")
        return EffectDelta("power", power_scale=scale, se_scale=scale ** 0.3)
    if app.app_id == "beam":
        ues = int(params.get("num_ues", 0))
        boost = params.get("boost", 0.3)
        if ues == 0:
            return EffectDelta("beam")
        se = np.ones(num_ues, dtype=np.float64)
        se[:ues] = 1.0 + boost
        return EffectDelta("beam", se_scale=se, extra_power_w=2.0 * ues)
    if app.app_id == "handover":
        offset = params.get("offset", 0.0)
        return EffectDelta("handover", se_scale=1.0 + 0.05 * offset,
                           arrival_scale=1.0 + 0.02 * offset)
    raise AppError(f"unknown app {app.app_id!r}")


def apply_app(sim, app: AppDescriptor, params: dict[str, float]) -> EffectDelta:
    """Compute and apply the app's delta through the simulator effect state."""
    delta = effect_delta(sim, app, params)
    sim.ue_se_scale = sim.ue_se_scale * np.asarray(delta.se_scale, dtype=np.float64)
    sim.ue_arrival_scale = sim.ue_arrival_scale * np.asarray(delta.arrival_scale, dtype=np.float64)
    sim.power_scale *= delta.power_scale
    sim.extra_power_w += delta.extra_power_w
    for cell, active in delta.cell_changes:
        sim.cells_active[cell] = active
    return delta


@dataclass(frozen=True)
class TeamContext:
    """Last executed peer-module action inside the current decision window."""

    peer_module: str
    peer_action: tuple


def orchestrate_apps(
    goal_metric: str,
    goal_direction: int,
    goal_satisfied: bool,
    load_factor: float,
    team_ctx: TeamContext | None = None,
    catalog: dict[str, AppDescriptor] | None = None,
    budget: float = 3.0,
    eta: float = 0.01,
) -> tuple[list[str], dict]:
    """Rank the pool against the goal; returns (ordered app ids, decision state).

    Conflicting side effects are penalized in proportion to load, so e.g.
    cell sleeping loses to power control for energy goals under high load.
    Output is truncated so cumulative cost stays within the budget.
    """
    catalog = catalog or APP_CATALOG
    decision_state = {
        "goal_metric": goal_metric,
        "goal_direction": goal_direction,
        "load_factor": load_factor,
    }
    if team_ctx is not None:
        decision_state["peer_action"] = (team_ctx.peer_module, team_ctx.peer_action)
    if goal_satisfied:
        return [], decision_state

    load = min(max(load_factor, 0.0), 1.0)
    scored: list[tuple[float, float, str]] = []
    for app in catalog.values():
        base = goal_direction * app.effect_profile.get(goal_metric, 0.0)
        if base <= 0:
            continue
        conflict = 0.0
        for metric, strength in app.effect_profile.items():
            if metric == goal_metric:
                continue
            harmful = strength if metric in ("latency", "loss") else -strength
            if harmful > 0:
                conflict += harmful * load
        scored.append((base - conflict - eta * app.cost, app.cost, app.app_id))
    scored.sort(key=lambda t: (-t[0], t[1], t[2]))

    picked: list[str] = []
    spent = 0.0
    for score, cost, app_id in scored:
        if score <= 0 or spent + cost > budget:
            continue
        picked.append(app_id)
        spent += cost
    return picked, decision_state

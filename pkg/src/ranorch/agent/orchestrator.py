"""Epoch-level orchestration loop over the live simulator.

One epoch = `epoch_ttis` simulator steps bracketed by an agentic decision
phase: analytics retrieval, per-metric forecasts, intent validation, goal
synthesis, and module activations (inter-slice reallocation, app
orchestration, self-healing), each recorded on a typed execution trace.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ranorch.agent.graph import RAG, SUPER, AgentGraph
from ranorch.agent.replay import EpisodeTrajectory, ReplayBuffer, TrajStep
from ranorch.agent.rewards import (
    GoalToken,
    auto_goal,
    fulfillment,
    goal_from_intent,
    intrinsic_reward,
    signed_delta,
    sla_violation_load,
)
from ranorch.agent.toyenv import ACTIONS, METRICS, NUM_ACTIONS
from ranorch.apps import APP_CATALOG, TeamContext, apply_app, orchestrate_apps
from ranorch.forecast import (
    EwmaPredictor,
    ThresholdPair,
    encode_state,
    forecast_mix,
    identify_thresholds,
    default_xi,
)
from ranorch.intents import Intent
from ranorch.netsim.kpi import check_slice_qos
from ranorch.netsim.simulator import Simulator
from ranorch.sched import allocate_inter, build_assignments
from ranorch.selfheal import DriftDetector, HealingAgent, apply_heal
from ranorch.validate import (
    FeasibilityTable,
    ValidatorConfig,
    learn_feasibility,
    validate_kpi_centric,
    validate_slice_aware,
)

SLICE_CLASS_INDEX = {"eMBB": 0, "URLLC": 1, "BE": 2}


@dataclass(frozen=True)
class EpochEvent:
    """One orchestration epoch, JSON-serializable via to_dict()."""

    epoch: int
    step_start: int
    step_end: int
    mode: str                       # idle | intent | selfheal
    intent_text: str | None
    intent_type: str | None
    intent_origin: str | None
    verdict_allowed: bool | None
    verdict_reason: str | None
    goal_metric: str | None
    goal_delta: float | None
    goal_fulfillment: float | None
    activations: tuple[tuple[str, str], ...]   # (agent id, detail)
    trace: tuple[str, ...]
    trace_ok: bool
    drift: bool
    reward: float
    system: dict[str, float]
    per_slice: dict[int, dict[str, float]]

    def to_dict(self) -> dict:
        return {
            "epoch": self.epoch,
            "step_start": self.step_start,
            "step_end": self.step_end,
            "mode": self.mode,
            "intent_text": self.intent_text,
            "intent_type": self.intent_type,
            "intent_origin": self.intent_origin,
            "verdict_allowed": self.verdict_allowed,
            "verdict_reason": self.verdict_reason,
            "goal_metric": self.goal_metric,
            "goal_delta": self.goal_delta,
            "goal_fulfillment": self.goal_fulfillment,
            "activations": [list(a) for a in self.activations],
            "trace": list(self.trace),
            "trace_ok": self.trace_ok,
            "drift": self.drift,
            "reward": self.reward,
            "system": self.system,
            "per_slice": {str(k): v for k, v in self.per_slice.items()},
        }


@dataclass
class OrchestratorConfig:
    epoch_ttis: int = 20
    mix_window: int = 8            # epochs of class volumes feeding the mix forecast
    budget: float = 3.0            # per-epoch decision budget C_max
    kpi_weights: dict[str, float] = field(default_factory=lambda: {
        "throughput": 1.0, "latency": 1.0, "loss": 1.0, "energy_efficiency": 0.5,
    })
    sla_penalty: float = 1.0
    cost_penalty: float = 0.1
    drift_persistence: int = 3
    feasibility_refresh: int = 10  # epochs between table rebuilds
    forecast_horizon: int = 4


class Orchestrator:
    """Single owner of the simulator; one run_epoch() call per epoch."""

    def __init__(self, sim: Simulator, cfg: OrchestratorConfig | None = None,
                 validator_cfg: ValidatorConfig | None = None,
                 policy=None, table: FeasibilityTable | None = None,
                 weights: np.ndarray | None = None):
        self.sim = sim
        self.cfg = cfg or OrchestratorConfig()
        self.vcfg = validator_cfg or ValidatorConfig()
        self.policy = policy
        self.table = table or FeasibilityTable()
        self.graph = AgentGraph(sim.cfg.num_slices)
        S = sim.cfg.num_slices
        self.weights = np.asarray(weights if weights is not None else np.ones(S),
                                  dtype=np.float64)
        self.specs = sim.scenario.slices
        self.detector = DriftDetector(self.specs, self.cfg.drift_persistence)
        self.healer = HealingAgent(self.specs)
        self.buffer = ReplayBuffer(256)
        self.knowledge: dict[str, dict] = {}     # key -> latest analytics record
        self.epoch = 0
        self._mix_rows: list[dict[str, int]] = []
        self._load_hist: list[float] = []
        self._loss_hist: list[float] = []
        self._power_hist: list[float] = []
        self._feas_records: list = []
        self._boost: np.ndarray | None = None    # transient slice-boost weights
        self._classes = sorted({t.label for t in sim.scenario.ue_traffic})

    # ------------------------------------------------------------------ helpers

    def _advance(self, ttis: int) -> list:
        samples = []
        injector = getattr(self, "injector", None)
        weights = self.weights if self._boost is None else self._boost
        for _ in range(ttis):
            if injector is not None:
                injector.on_step(self.sim.n + 1)
            per_slice = self.sim.last_kpis.per_slice if self.sim.last_kpis else {}
            alloc = allocate_inter(per_slice, self.specs, weights, self.sim.cfg.num_rbgs)
            assign = build_assignments(self.sim, alloc)
            samples.append(self.sim.step(alloc, assign))
        return samples

    def _record_histories(self, samples) -> None:
        bits: dict[str, int] = {c: 0 for c in self._classes}
        for s in samples:
            for label, b in s.class_bits.items():
                bits[label] = bits.get(label, 0) + b
        self._mix_rows.append(bits)
        if len(self._mix_rows) > self.cfg.mix_window:
            self._mix_rows.pop(0)
        last = samples[-1].system
        self._load_hist.append(last["load"])
        self._loss_hist.append(last["loss"])
        self._power_hist.append(last["power_w"])

    def _mix_forecast(self):
        if not self._mix_rows:
            rows = np.ones((1, len(self._classes)))
        else:
            rows = np.array([[r.get(c, 0) for c in self._classes]
                             for r in self._mix_rows], dtype=np.float64)
        return forecast_mix(rows, max(self.cfg.forecast_horizon,
                                      self.vcfg.dominance_duration))

    def _predictions(self) -> dict[str, float]:
        ewma = EwmaPredictor(alpha=0.5)
        out = {}
        for metric, hist in (("traffic_load", self._load_hist),
                             ("packet_loss", self._loss_hist),
                             ("power", self._power_hist)):
            out[metric] = ewma.predict(np.asarray(hist[-16:], dtype=np.float64)) \
                if hist else 0.0
        return out

    def _thresholds(self) -> dict[str, ThresholdPair]:
        out: dict[str, ThresholdPair] = {}
        if len(self._load_hist) >= 4:
            history = list(zip(self._load_hist, self._loss_hist, self._power_hist))
            xi_a = default_xi(np.asarray(self._loss_hist))
            xi_b = default_xi(np.asarray(self._power_hist))
            out["traffic_load"] = identify_thresholds(history, True, True, xi_a, xi_b)
        return out

    def _qos_ok(self, slice_id: int) -> bool:
        if self.sim.last_kpis is None:
            return True
        kpis = self.sim.last_kpis.per_slice.get(slice_id, {})
        return all(check_slice_qos(kpis, self.specs[slice_id]).values())

    def _slice_id(self, slice_type: str) -> int:
        for spec in self.specs:
            if spec.slice_type == slice_type:
                return spec.slice_id
        raise ValueError(f"no slice of type {slice_type!r}")

    # ------------------------------------------------------------------ actions

    def _execute_action(self, name: str, goal: GoalToken | None,
                        trace: list[str], activations: list[tuple[str, str]],
                        team: list) -> float:
        """Run one module activation; returns its cost."""
        per_slice = self.sim.last_kpis.per_slice if self.sim.last_kpis else {}
        system = self.sim.last_kpis.system if self.sim.last_kpis else {}
        cost = dict(ACTIONS).get(name, 1.0)
        if name == "rag_query":
            trace += [RAG, SUPER]
            activations.append((RAG, "analytics query"))
            return cost
        if name == "noop":
            return 0.0
        if name == "inter_slice":
            agent = "I"
            from ranorch.sched import deficit_vector

            deficits = deficit_vector(per_slice, self.specs)
            self.weights = np.maximum(self.weights * (1.0 + 0.5 * deficits), 1e-3)
            detail = "weights " + ",".join(f"{w:.2f}" for w in self.weights)
            team.append(("slice-sched", ("inter", tuple(np.round(self.weights, 2)))))
        elif name in ("traffic_steer", "power_control"):
            agent = "O"
            ctx = TeamContext(*team[-1]) if team else None
            metric = goal.metric if goal else "throughput"
            direction = goal.direction if goal else +1
            satisfied = False
            apps, _ = orchestrate_apps(metric, direction, satisfied,
                                       system.get("load", 0.0) / 1e4 if system else 0.0,
                                       team_ctx=ctx, budget=self.cfg.budget)
            preferred = "steer" if name == "traffic_steer" else "power"
            chosen = ([preferred] + [a for a in apps if a != preferred])[:1]
            for app_id in chosen:
                params = {"fraction": 0.2} if app_id == "steer" else (
                    {"scale": 0.8} if app_id == "power" else {})
                apply_app(self.sim, APP_CATALOG[app_id], params)
            detail = "apps " + ",".join(chosen)
            team.append(("ran-apps", ("apps", tuple(chosen))))
        elif name == "self_heal":
            violated = [s.slice_id for s in self.specs if not self._qos_ok(s.slice_id)]
            sid = violated[0] if violated else 0
            agent = f"C{sid}"
            action = self.healer.propose(per_slice)
            self.weights = apply_heal(self.weights, action)
            detail = "heal " + ",".join(f"{d:+.2f}" for d in action.weight_deltas)
        else:
            raise ValueError(f"unknown action {name!r}")
        trace += [agent, RAG, SUPER]
        activations.append((agent, detail))
        self.knowledge[agent] = {"epoch": self.epoch, "detail": detail}
        return cost

    def _decide(self, goal: GoalToken | None, mode: str,
                trace: list[str], activations: list[tuple[str, str]]) -> list[str]:
        """Pick the epoch's module activations within the budget."""
        names: list[str] = []
        if self.policy is not None and goal is not None:
            state = self._policy_state(goal)
            candidates = self.policy.anchor_candidates(self.buffer) if len(self.buffer) else []
            anchor = self.policy.sample_meta(state, goal, candidates)
            spent = 0.0
            mask = self._safe_mask(mode, spent)
            for _ in range(3):
                if not mask.any():
                    break
                action = self.policy.sample_control([state], goal, anchor, 0, mask)
                name = ACTIONS[action][0]
                names.append(name)
                spent += ACTIONS[action][1]
                mask = self._safe_mask(mode, spent)
        elif mode == "selfheal":
            names = ["self_heal"]
        elif goal is not None:
            names = ["inter_slice"]
            if goal.metric in ("throughput", "energy_efficiency"):
                names.append("traffic_steer" if goal.metric == "throughput"
                             else "power_control")
        spent = 0.0
        team: list = []
        executed: list[str] = []
        for name in names:
            cost = dict(ACTIONS).get(name, 1.0)
            if spent + cost > self.cfg.budget:
                continue
            spent += self._execute_action(name, goal, trace, activations, team)
            executed.append(name)
        return executed

    def _safe_mask(self, mode: str, spent: float) -> np.ndarray:
        mask = np.ones(NUM_ACTIONS, dtype=bool)
        if mode != "selfheal":
            mask[[i for i, (n, _) in enumerate(ACTIONS) if n == "self_heal"]] = False
        for i, (_, cost) in enumerate(ACTIONS):
            if spent + cost > self.cfg.budget:
                mask[i] = False
        return mask

    def _policy_state(self, goal: GoalToken) -> np.ndarray:
        system = self.sim.last_kpis.system if self.sim.last_kpis else {}
        base = {"throughput": 1e4, "latency": 10.0, "loss": 0.05, "energy_efficiency": 50.0}
        kvec = [system.get(m, 0.0) / base[m] for m in METRICS]
        gvec = [1.0 if goal.metric == m else 0.0 for m in METRICS]
        return np.array(kvec + gvec + [0.0, 1.0])

    # ------------------------------------------------------------------ epochs

    def run_epoch(self, intent: Intent | None = None) -> EpochEvent:
        self.epoch += 1
        cfg = self.cfg
        trace: list[str] = [SUPER, RAG, SUPER]
        activations: list[tuple[str, str]] = [(RAG, "epoch analytics")]
        prev_system = dict(self.sim.last_kpis.system) if self.sim.last_kpis else {}

        mode = "idle"
        goal: GoalToken | None = None
        verdict_allowed: bool | None = None
        verdict_reason: str | None = None
        drift_event = None
        signature = None

        if self.sim.last_kpis is not None:
            drift_event = self.detector.observe(
                self.sim.n, self.sim.last_kpis.per_slice,
                self.sim.last_kpis.system.get("load", 0.0),
                self.sim.last_allocation,
            )

        if intent is not None:
            mode = "intent"
            if intent.is_slice_boost:
                mix = self._mix_forecast()
                sid = self._slice_id(intent.target_class)
                verdict = validate_slice_aware(
                    mix, intent, self.vcfg, self._qos_ok(sid),
                    SLICE_CLASS_INDEX[intent.target_class],
                )
                if verdict.allowed and intent.origin == "human":
                    signature = encode_state(self._predictions(), self._thresholds())
                    verdict = validate_kpi_centric(intent, signature, self.table)
                verdict_allowed, verdict_reason = verdict.allowed, verdict.reason
                if verdict.allowed:
                    boost = self.weights.copy()
                    boost[sid] += intent.delta_rbgs
                    self._boost = boost
                    activations.append(("I", f"slice boost +{intent.delta_rbgs}"))
                    trace += ["I", RAG, SUPER]
                    self.knowledge["I"] = {"epoch": self.epoch,
                                           "detail": f"boost s{sid}"}
            else:
                if intent.origin == "human":
                    signature = encode_state(self._predictions(), self._thresholds())
                    verdict = validate_kpi_centric(intent, signature, self.table)
                    verdict_allowed, verdict_reason = verdict.allowed, verdict.reason
                else:
                    verdict_allowed, verdict_reason = True, "autonomous goal"
                if verdict_allowed:
                    baseline = prev_system.get(intent.metric, 0.0) or 1e-9
                    goal = goal_from_intent(intent, baseline)
        elif drift_event is not None:
            mode = "selfheal"
            goal = auto_goal(self.sim.last_kpis.per_slice, self.specs) \
                if self.sim.last_kpis else None

        if mode == "intent" and verdict_allowed is False:
            goal = None
        if goal is not None or mode == "selfheal":
            self._decide(goal, mode, trace, activations)

        samples = self._advance(cfg.epoch_ttis)
        self._record_histories(samples)
        self._boost = None
        last = samples[-1]

        deltas = {m: signed_delta(m, prev_system.get(m, last.system.get(m, 0.0)),
                                  last.system.get(m, 0.0))
                  for m in ("throughput", "latency", "loss", "energy_efficiency")}
        norm = {"throughput": 1e4, "latency": 10.0, "loss": 0.1, "energy_efficiency": 50.0}
        deltas = {m: d / norm[m] for m, d in deltas.items()}
        v_sla = sla_violation_load(last.per_slice, self.specs)
        n_actions = sum(1 for a, _ in activations if a != RAG)
        reward = intrinsic_reward(deltas, cfg.kpi_weights, v_sla, float(n_actions),
                                  cfg.sla_penalty, cfg.cost_penalty)

        q = None
        if goal is not None:
            value = last.system.get(goal.metric, 0.0)
            q = fulfillment(goal, value)
            state = self._policy_state(goal)
            achieved = goal.direction * (value - goal.baseline) / max(abs(goal.baseline), 1e-9)
            step = TrajStep(state, 0, -1, reward, state)
            try:
                episode = EpisodeTrajectory(goal=goal, steps=(step,),
                                            achieved_delta=float(achieved),
                                            fulfillment=q)
                if self.policy is not None:
                    self.policy.observe_episode(self.buffer, episode, finetune=False)
                else:
                    self.buffer.insert(episode)
            except Exception:
                pass

        if intent is not None and signature is not None:
            drift_bit = 1 if sla_violation_load(last.per_slice, self.specs) > 0 else 0
            self._feas_records.append((intent.intent_type, signature, drift_bit))
            if self.epoch % cfg.feasibility_refresh == 0 and self._feas_records:
                learned = learn_feasibility(self._feas_records)
                self.table.entries.update(learned.entries)
                self.table.counts.update(learned.counts)

        violation = self.graph.validate_trace(trace)
        return EpochEvent(
            epoch=self.epoch,
            step_start=last.step - cfg.epoch_ttis + 1,
            step_end=last.step,
            mode=mode,
            intent_text=intent.raw_text if intent else None,
            intent_type=intent.intent_type if intent else None,
            intent_origin=intent.origin if intent else None,
            verdict_allowed=verdict_allowed,
            verdict_reason=verdict_reason,
            goal_metric=goal.metric if goal else None,
            goal_delta=goal.delta if goal else None,
            goal_fulfillment=q,
            activations=tuple(activations),
            trace=tuple(trace),
            trace_ok=violation is None,
            drift=drift_event is not None,
            reward=float(reward),
            system=dict(last.system),
            per_slice={k: dict(v) for k, v in last.per_slice.items()},
        )

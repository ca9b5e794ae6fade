"""Closed-loop run driver: orchestrator epochs, degradation schedule, logs."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ranorch.agent.orchestrator import Orchestrator, OrchestratorConfig
from ranorch.config import Scenario
from ranorch.harness.logs import JsonlWriter
from ranorch.harness.manifest import RunManifest
from ranorch.intents import parse_intent
from ranorch.netsim.simulator import Simulator
from ranorch.selfheal import DegradationInjector, score_recovery
from ranorch.validate import ValidatorConfig


@dataclass
class EventSpec:
    kind: str
    magnitude: float
    at_step: int
    duration: int
    target_slice: int | None = None


def parse_event_schedule(text: str) -> list[EventSpec]:
    """One event per line: ``step kind magnitude duration [slice]``; blank
    lines and ``#`` comments are skipped."""
    out = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (4, 5):
            raise ValueError(f"malformed event line {lineno}: {line!r}")
        out.append(EventSpec(
            kind=parts[1], magnitude=float(parts[2]), at_step=int(parts[0]),
            duration=int(parts[3]),
            target_slice=int(parts[4]) if len(parts) == 5 else None,
        ))
    return out


@dataclass
class RunResult:
    out_dir: Path
    events: list = field(default_factory=list)
    recoveries: list = field(default_factory=list)


def run(
    scenario: Scenario,
    horizon_epochs: int,
    out_dir: str | Path,
    intents: dict[int, str] | None = None,
    event_specs: list[EventSpec] | None = None,
    policy=None,
    orch_cfg: OrchestratorConfig | None = None,
    validator_cfg: ValidatorConfig | None = None,
) -> RunResult:
    """Run the closed loop for `horizon_epochs`; horizon 0 writes empty logs.

    intents: epoch index (1-based) -> intent text.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    intents = intents or {}
    cfg = orch_cfg or OrchestratorConfig()

    sim = Simulator(scenario)
    orch = Orchestrator(sim, cfg, validator_cfg, policy=policy)
    injector = DegradationInjector(sim)
    orch.injector = injector
    for spec in event_specs or []:
        injector.schedule(spec.kind, spec.magnitude, spec.at_step, spec.duration,
                          target_slice=spec.target_slice)

    result = RunResult(out_dir)
    kpi_hist: dict[str, list[float]] = {"throughput": [], "latency": [],
                                        "energy_efficiency": []}
    with JsonlWriter(out_dir / "kpis.jsonl") as kpis_log, \
            JsonlWriter(out_dir / "events.jsonl") as events_log, \
            JsonlWriter(out_dir / "recovery.jsonl") as recovery_log:
        for epoch in range(1, horizon_epochs + 1):
            intent = None
            text = intents.get(epoch)
            if text is not None:
                intent = parse_intent(text)
            event = orch.run_epoch(intent)
            result.events.append(event)
            events_log.write(event.to_dict())
            row = {"epoch": event.epoch, "step": event.step_end}
            row.update({f"sys_{k}": v for k, v in event.system.items()})
            for sid, kp in event.per_slice.items():
                row.update({f"s{sid}_{k}": v for k, v in kp.items()})
            kpis_log.write(row)
            for metric in kpi_hist:
                kpi_hist[metric].append(event.system.get(metric, 0.0))

        # Score recovery for every released injected event.
        window = min(50, max(horizon_epochs // 4, 1))
        for ev in injector.events:
            if not ev.released:
                continue
            end_epoch = (ev.at_step - 1) // cfg.epoch_ttis + 1
            for metric in ("throughput", "energy_efficiency"):
                series = np.asarray(kpi_hist[metric][:end_epoch], dtype=np.float64)
                post = np.asarray(kpi_hist[metric], dtype=np.float64)
                if series.size == 0 or post.size == 0 or np.median(series[-window:]) <= 0:
                    continue
                rec = score_recovery(ev, metric, series, post, window=window)
                result.recoveries.append(rec)
                recovery_log.write(rec.to_dict())

    RunManifest(
        scenario_hash=scenario.config_hash(),
        seed=scenario.sim.seed,
        horizon_epochs=horizon_epochs,
        epoch_ttis=cfg.epoch_ttis,
        intents=dict(intents),
        events=[[s.kind, s.magnitude, s.at_step, s.duration, s.target_slice]
                for s in event_specs or []],
    ).save(out_dir / "manifest.json")
    return result

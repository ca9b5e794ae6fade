"""HTTP control surface for the closed loop.

All mutating handlers serialize through one lock; the loop advances only via
explicit ``/advance`` calls, so clients get deterministic, replayable runs.
Epoch events stream over server-sent events.
"""

from __future__ import annotations

import json
import threading
from collections import deque

from fastapi import FastAPI, HTTPException
from fastapi.responses import StreamingResponse
from pydantic import BaseModel

from ranorch.agent.orchestrator import Orchestrator, OrchestratorConfig
from ranorch.config import Scenario, default_scenario
from ranorch.harness.report import activation_heatmap
from ranorch.intents import IntentParseError, parse_intent
from ranorch.netsim.simulator import Simulator
from ranorch.selfheal import DegradationInjector, HealError


class IntentRequest(BaseModel):
    text: str


class InjectRequest(BaseModel):
    kind: str
    magnitude: float
    at_step: int
    duration: int
    target_slice: int | None = None


class AdvanceRequest(BaseModel):
    epochs: int = 1


class ServiceState:
    def __init__(self, scenario: Scenario, orch_cfg: OrchestratorConfig | None = None):
        self.lock = threading.Lock()
        self.sim = Simulator(scenario)
        self.orch = Orchestrator(self.sim, orch_cfg or OrchestratorConfig())
        self.injector = DegradationInjector(self.sim)
        self.orch.injector = self.injector
        self.paused = False
        self.intent_queue: deque[str] = deque()
        self.events: list[dict] = []
        self.kpi_rows: list[dict] = []

    def advance(self, epochs: int) -> list[dict]:
        out = []
        for _ in range(epochs):
            intent = None
            if self.intent_queue:
                intent = parse_intent(self.intent_queue.popleft())
            event = self.orch.run_epoch(intent)
            record = event.to_dict()
            self.events.append(record)
            row = {"epoch": event.epoch, "step": event.step_end}
            row.update({f"sys_{k}": v for k, v in event.system.items()})
            for sid, kp in event.per_slice.items():
                row.update({f"s{sid}_{k}": v for k, v in kp.items()})
            self.kpi_rows.append(row)
            out.append(record)
        return out


def create_app(scenario: Scenario | None = None,
               orch_cfg: OrchestratorConfig | None = None) -> FastAPI:
    state = ServiceState(scenario or default_scenario(), orch_cfg)
    app = FastAPI(title="ranorch")
    app.state.service = state

    @app.get("/status")
    def status() -> dict:
        return {
            "epoch": state.orch.epoch,
            "step": state.sim.n,
            "paused": state.paused,
            "queued_intents": len(state.intent_queue),
            "events": len(state.events),
        }

    @app.post("/intent")
    def submit_intent(req: IntentRequest) -> dict:
        try:
            intent = parse_intent(req.text)
        except IntentParseError as exc:
            raise HTTPException(status_code=400,
                                detail={"error": str(exc), "position": exc.position})
        with state.lock:
            state.intent_queue.append(req.text)
        return {"queued": True, "intent_type": intent.intent_type,
                "position_in_queue": len(state.intent_queue)}

    @app.post("/inject")
    def inject(req: InjectRequest) -> dict:
        with state.lock:
            try:
                event = state.injector.schedule(
                    req.kind, req.magnitude, req.at_step, req.duration,
                    target_slice=req.target_slice,
                )
            except HealError as exc:
                raise HTTPException(status_code=400, detail=str(exc))
        return {"event_id": event.event_id, "kind": event.kind,
                "at_step": event.at_step, "duration": event.duration}

    @app.post("/advance")
    def advance(req: AdvanceRequest) -> dict:
        if req.epochs < 0:
            raise HTTPException(status_code=400, detail="epochs must be >= 0")
        with state.lock:
            if state.paused:
                raise HTTPException(status_code=409, detail="loop is paused")
            events = state.advance(req.epochs)
        return {"events": events}

    @app.post("/pause")
    def pause() -> dict:
        with state.lock:
            state.paused = True
        return {"paused": True}

    @app.post("/resume")
    def resume() -> dict:
        with state.lock:
            state.paused = False
        return {"paused": False}

    @app.get("/kpis")
    def kpis(limit: int = 2000) -> dict:
        return {"rows": state.kpi_rows[-limit:]}

    @app.get("/timeline")
    def timeline(limit: int = 2000) -> dict:
        events = state.events[-limit:]
        cols, rows = activation_heatmap(events)
        return {"columns": cols, "rows": rows,
                "epochs": [ev["epoch"] for ev in events]}

    @app.get("/events")
    def events(limit: int = 2000) -> dict:
        return {"events": state.events[-limit:]}

    @app.get("/events/stream")
    def stream(since: int = 0) -> StreamingResponse:
        def gen():
            for record in state.events[since:]:
                yield f"data: {json.dumps(record, sort_keys=True)}\n\n"
        return StreamingResponse(gen(), media_type="text/event-stream")

    return app

"""Typed agent-interaction graph and execution-trace legality checks.

Vertices: one super agent, one retrieval/analytics agent, and the
decision-capable modules (app orchestration O, inter-slice I, per-slice
intra-slice J_s and self-healing C_s). Edge types:

  control    super -> each decision-capable agent
  info       super <-> retrieval agent (only info edges in the graph)
  analytics  each decision-capable agent -> retrieval agent
"""

from __future__ import annotations

from dataclasses import dataclass, field

SUPER = "super"
RAG = "rag"


@dataclass(frozen=True)
class TraceViolation:
    index: int
    rule: str
    detail: str


@dataclass
class AgentGraph:
    num_slices: int = 3
    decision_agents: tuple[str, ...] = field(init=False)
    control_edges: frozenset = field(init=False)
    info_edges: frozenset = field(init=False)
    analytics_edges: frozenset = field(init=False)

    def __post_init__(self) -> None:
        dec = ["O", "I"]
        dec += [f"J{s}" for s in range(self.num_slices)]
        dec += [f"C{s}" for s in range(self.num_slices)]
        self.decision_agents = tuple(dec)
        self.control_edges = frozenset((SUPER, d) for d in dec)
        self.info_edges = frozenset({(SUPER, RAG), (RAG, SUPER)})
        self.analytics_edges = frozenset((d, RAG) for d in dec)

    @property
    def agents(self) -> tuple[str, ...]:
        return (SUPER, RAG) + self.decision_agents

    @property
    def edges(self) -> frozenset:
        return self.control_edges | self.info_edges | self.analytics_edges

    def validate_trace(self, trace: list[str]) -> TraceViolation | None:
        """First violation of the trace-legality rules, or None if legal.

        Rules: (i) traces start at the super agent; (ii) every hop is a graph
        edge; (iii) every decision-agent visit is immediately preceded by the
        super agent and immediately followed by the retrieval agent; (iv) only
        known agents appear.
        """
        if not trace:
            return TraceViolation(0, "start", "empty trace")
        known = set(self.agents)
        for i, agent in enumerate(trace):
            if agent not in known:
                return TraceViolation(i, "vertex", f"unknown agent {agent!r}")
        if trace[0] != SUPER:
            return TraceViolation(0, "start", f"trace starts at {trace[0]!r}, not {SUPER!r}")
        edges = self.edges
        for i in range(len(trace) - 1):
            hop = (trace[i], trace[i + 1])
            if hop not in edges:
                return TraceViolation(i + 1, "edge", f"no edge {hop[0]!r} -> {hop[1]!r}")
        dec = set(self.decision_agents)
        for i, agent in enumerate(trace):
            if agent not in dec:
                continue
            if i == 0 or trace[i - 1] != SUPER:
                return TraceViolation(i, "bracket", f"{agent!r} not preceded by {SUPER!r}")
            if i + 1 >= len(trace) or trace[i + 1] != RAG:
                return TraceViolation(i, "bracket", f"{agent!r} not followed by {RAG!r}")
        return None


def validate_trace(trace: list[str], num_slices: int = 3) -> TraceViolation | None:
    return AgentGraph(num_slices).validate_trace(trace)

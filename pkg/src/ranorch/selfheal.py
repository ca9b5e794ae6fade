"""QoS-drift detection, bounded priority-weight healing, supervised app
selection, degradation injection, and recovery-ratio scoring."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ranorch.netsim.kpi import check_slice_qos


class HealError(ValueError):
    pass


# ------------------------------------------------------------------ drift


@dataclass(frozen=True)
class DriftEvent:
    detection_step: int
    slices: tuple[int, ...]
    violated: tuple[str, ...]            # "slice:constraint" labels
    deficits: dict[str, float]           # label -> desired - actual (signed)
    load: float
    allocation: tuple[int, ...]


class DriftDetector:
    """Emits one event per incident: a constraint must fail for the whole
    persistence window, and the incident must clear before the next event."""

    def __init__(self, specs, persistence: int = 5):
        if persistence < 1:
            raise HealError("persistence must be >= 1")
        self.specs = specs
        self.persistence = persistence
        self._fail_streak: dict[str, int] = {}
        self._in_incident = False

    def observe(self, step: int, per_slice: dict[int, dict[str, float]],
                load: float, allocation) -> DriftEvent | None:
        failing: list[str] = []
        deficits: dict[str, float] = {}
        for spec in self.specs:
            kpis = per_slice.get(spec.slice_id)
            if kpis is None:
                continue
            checks = check_slice_qos(kpis, spec)
            for name, ok in checks.items():
                label = f"{spec.slice_id}:{name}"
                if ok:
                    self._fail_streak[label] = 0
                    continue
                self._fail_streak[label] = self._fail_streak.get(label, 0) + 1
                if self._fail_streak[label] >= self.persistence:
                    failing.append(label)
                    direction, bound = spec.constraints[name]
                    actual = kpis[name]
                    deficits[label] = (bound - actual) if direction == "ge" else (actual - bound)
        if not failing:
            self._in_incident = False
            return None
        if self._in_incident:
            return None
        self._in_incident = True
        return DriftEvent(
            detection_step=step,
            slices=tuple(sorted({int(lbl.split(":")[0]) for lbl in failing})),
            violated=tuple(sorted(failing)),
            deficits=deficits,
            load=load,
            allocation=tuple(int(a) for a in allocation),
        )


def detect_drift(per_slice_stream, specs, persistence: int = 5) -> DriftEvent | None:
    """Scan a finished KPI stream; returns the first debounced event, if any."""
    det = DriftDetector(specs, persistence)
    for step, (per_slice, load, alloc) in enumerate(per_slice_stream, 1):
        event = det.observe(step, per_slice, load, alloc)
        if event is not None:
            return event
    return None


# ------------------------------------------------------------------ healing MDP


def heal_reward(slice_type: str, measured: float, target: float) -> float:
    """Slice-aware SLA-adherence ratio."""
    if slice_type == "URLLC":
        if measured <= 0:
            raise HealError("measured delay must be positive")
        return target / measured
    if target <= 0:
        raise HealError("target must be positive")
    return measured / target


@dataclass(frozen=True)
class HealAction:
    weight_deltas: np.ndarray
    max_delta: float = 0.5

    def __post_init__(self) -> None:
        if np.any(np.abs(self.weight_deltas) > self.max_delta + 1e-12):
            raise HealError("weight delta exceeds the componentwise bound")


def apply_heal(weights: np.ndarray, action: HealAction) -> np.ndarray:
    """w' = max(0, w + dw); result feeds the inter-slice priority weights."""
    return np.maximum(np.asarray(weights, dtype=np.float64) + action.weight_deltas, 0.0)


class HealingAgent:
    """Desk-scale healer: bounded weight nudges proportional to deficit."""

    def __init__(self, specs, max_delta: float = 0.5, gain: float = 1.0):
        self.specs = specs
        self.max_delta = max_delta
        self.gain = gain

    def propose(self, per_slice: dict[int, dict[str, float]]) -> HealAction:
        from ranorch.sched import deficit_vector

        deficits = deficit_vector(per_slice, self.specs)
        raw = self.gain * deficits
        if np.any(deficits > 0):
            # Fund boosts by easing slices with zero deficit.
            donors = deficits == 0
            if donors.any():
                raw[donors] = -0.5 * raw.max()
        dw = np.clip(raw, -self.max_delta, self.max_delta)
        return HealAction(dw, self.max_delta)


# ------------------------------------------------------------------ app selection


@dataclass(frozen=True)
class AppSelectFeatures:
    d_throughput: float     # current - value tau steps earlier
    d_loss: float
    d_energy_eff: float
    cqi: float
    load: float


RULE_TABLE_DOC = """Rule baseline:
  energy efficiency falling with low load       -> sleep
  throughput falling with poor channel          -> beam
  throughput falling with good channel          -> steer
  loss rising                                   -> handover
  energy efficiency falling with high load      -> power
"""


def _rule_select(f: AppSelectFeatures, eps: float) -> set[str]:
    out: set[str] = set()
    if f.d_energy_eff < -eps:
        out.add("sleep" if f.load < 0.5 else "power")
    if f.d_throughput < -eps:
        out.add("beam" if f.cqi < 7 else "steer")
    if f.d_loss > eps:
        out.add("handover")
    return out


class AppSelector:
    """Rule baseline by default; optionally a shallow learned classifier
    behind the same interface."""

    def __init__(self, mode: str = "rules", eps: float = 1e-6):
        if mode not in ("rules", "learned"):
            raise HealError(f"unknown selector mode {mode!r}")
        self.mode = mode
        self.eps = eps
        self._model = None
        self._labels: list[str] = []

    def fit(self, features: list[AppSelectFeatures], labels: list[set[str]]) -> None:
        from sklearn.tree import DecisionTreeClassifier

        self._labels = sorted({app for ls in labels for app in ls})
        X = np.array([[f.d_throughput, f.d_loss, f.d_energy_eff, f.cqi, f.load]
                      for f in features])
        Y = np.array([[1 if app in ls else 0 for app in self._labels] for ls in labels])
        self._model = DecisionTreeClassifier(max_depth=6, random_state=0).fit(X, Y)

    def select(self, f: AppSelectFeatures) -> set[str]:
        if self.mode == "rules":
            return _rule_select(f, self.eps)
        if self._model is None:
            raise HealError("learned selector is not trained")
        x = np.array([[f.d_throughput, f.d_loss, f.d_energy_eff, f.cqi, f.load]])
        row = self._model.predict(x)[0]
        return {app for app, bit in zip(self._labels, row) if bit}


def select_apps(features: AppSelectFeatures, model: AppSelector) -> set[str]:
    return model.select(features)


# ------------------------------------------------------------------ injection


@dataclass
class DegradationEvent:
    event_id: int
    kind: str                      # surge | sleep | perturb
    magnitude: float
    at_step: int
    duration: int
    target_slice: int | None = None
    target_cell: int | None = None
    seed: int = 0
    pre_value: float | None = None
    active: bool = False
    released: bool = False
    saved_state: dict = field(default_factory=dict)


EVENT_KINDS = ("surge", "sleep", "perturb")


class DegradationInjector:
    """Applies deterministic seeded perturbations to the simulator's effect
    state; rejects overlapping events on the same resource."""

    def __init__(self, sim):
        self.sim = sim
        self._next_id = 0
        self.events: list[DegradationEvent] = []

    def schedule(self, kind: str, magnitude: float, at_step: int, duration: int,
                 target_slice: int | None = None, target_cell: int | None = None,
                 seed: int = 0) -> DegradationEvent:
        if kind not in EVENT_KINDS:
            raise HealError(f"unknown degradation kind {kind!r}")
        if at_step < 1:
            raise HealError("event step must be inside the horizon")
        for other in self.events:
            if other.released:
                continue
            same_resource = (
                other.kind == kind
                and other.target_slice == target_slice
                and other.target_cell == target_cell
            )
            overlap = at_step < other.at_step + other.duration and other.at_step < at_step + duration
            if same_resource and overlap:
                raise HealError("overlapping events on the same resource")
        if kind == "sleep":
            cell = 0 if target_cell is None else target_cell
            if self.sim.cells_active.sum() <= 1 and self.sim.cells_active[cell]:
                raise HealError("cannot sleep the last active cell")
        event = DegradationEvent(self._next_id, kind, magnitude, at_step, duration,
                                 target_slice, target_cell, seed)
        self._next_id += 1
        self.events.append(event)
        return event

    def on_step(self, step: int) -> None:
        """Apply/release events whose window contains this step."""
        sim = self.sim
        for ev in self.events:
            if not ev.active and not ev.released and step >= ev.at_step:
                ev.active = True
                if ev.kind == "surge":
                    ues = (sim.slice_members[ev.target_slice]
                           if ev.target_slice is not None else np.arange(sim.cfg.num_ues))
                    ev.saved_state["arrival"] = sim.ue_arrival_scale[ues].copy()
                    sim.ue_arrival_scale[ues] *= ev.magnitude
                elif ev.kind == "sleep":
                    cells = [c for c in range(1, sim.cfg.num_cells)
                             if sim.cells_active[c]][: max(int(ev.magnitude), 0)]
                    ev.saved_state["cells"] = cells
                    for c in cells:
                        sim.cells_active[c] = False
                    # Displaced load from slept neighbors.
                    ev.saved_state["arrival_all"] = sim.ue_arrival_scale.copy()
                    sim.ue_arrival_scale *= 1.0 + 0.1 * len(cells)
                elif ev.kind == "perturb":
                    ev.saved_state["se"] = sim.ue_se_scale.copy()
                    sim.ue_se_scale *= 1.0 / max(ev.magnitude, 1e-6)
            if ev.active and not ev.released and step >= ev.at_step + ev.duration:
                ev.active = False
                ev.released = True
                if ev.kind == "surge":
                    ues = (sim.slice_members[ev.target_slice]
                           if ev.target_slice is not None else np.arange(sim.cfg.num_ues))
                    sim.ue_arrival_scale[ues] = ev.saved_state["arrival"]
                elif ev.kind == "sleep":
                    for c in ev.saved_state["cells"]:
                        sim.cells_active[c] = True
                    sim.ue_arrival_scale = ev.saved_state["arrival_all"]
                elif ev.kind == "perturb":
                    sim.ue_se_scale = ev.saved_state["se"]


# ------------------------------------------------------------------ recovery


@dataclass(frozen=True)
class RecoveryRecord:
    event_id: int
    kpi: str
    pre_value: float
    rec_value: float
    ratio: float
    threshold: float
    passed: bool | None            # None = no steady state reached

    def to_dict(self) -> dict:
        return {
            "event_id": self.event_id,
            "kpi": self.kpi,
            "pre": self.pre_value,
            "rec": self.rec_value,
            "ratio": self.ratio,
            "threshold": self.threshold,
            "passed": self.passed,
        }


RECOVERY_THRESHOLDS = {"throughput": 0.90, "energy_efficiency": 0.87, "latency": 0.93}

# Delay-oriented KPIs invert the ratio so "higher is better" uniformly.
INVERTED_KPIS = ("latency", "loss")


def steady_median(series: np.ndarray, window: int = 50, rel_bound: float = 0.05
                  ) -> tuple[float, bool]:
    """Trailing-window median plus a relative-variation steadiness check."""
    series = np.asarray(series, dtype=np.float64)
    tail = series[-window:]
    med = float(np.median(tail))
    if len(tail) < window or med == 0:
        return med, False
    spread = float(np.percentile(tail, 90) - np.percentile(tail, 10))
    return med, spread <= rel_bound * abs(med) * 2.0


def score_recovery(event: DegradationEvent, kpi: str, series: np.ndarray,
                   post_series: np.ndarray, window: int = 50) -> RecoveryRecord:
    """ratio = recovered steady value / pre-event steady value (inverted for
    delay-oriented KPIs); pass iff ratio >= the KPI's threshold."""
    threshold = RECOVERY_THRESHOLDS.get(kpi, 0.90)
    pre, _ = steady_median(series, window)
    rec, steady = steady_median(post_series, window)
    if pre <= 0:
        raise HealError("pre-event KPI must be positive")
    if kpi in INVERTED_KPIS:
        ratio = pre / rec if rec > 0 else float("inf")
    else:
        ratio = rec / pre
    ratio = min(ratio, 10.0)
    passed: bool | None = ratio >= threshold
    if not steady:
        passed = None
    return RecoveryRecord(event.event_id, kpi, pre, rec, ratio, threshold, passed)

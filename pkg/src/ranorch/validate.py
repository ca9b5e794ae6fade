"""Bi-level intent validation: slice-aware dominance gate and KPI-centric
feasibility lookup backed by a learned table."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ranorch.forecast import MixForecast, StateSignature
from ranorch.intents import Intent


@dataclass(frozen=True)
class ValidatorConfig:
    dominance_threshold: float = 0.6   # tau_dom, typical range 0.58-0.70
    dominance_duration: int = 3        # T_dom, steps
    hysteresis: float = 0.02           # h

    def __post_init__(self) -> None:
        if not 0 < self.dominance_threshold < 1:
            raise ValueError("dominance_threshold must be in (0, 1)")
        if self.dominance_duration < 1:
            raise ValueError("dominance_duration must be >= 1")
        if self.hysteresis < 0:
            raise ValueError("hysteresis must be >= 0")


@dataclass(frozen=True)
class Verdict:
    allowed: bool
    reason: str


def validate_slice_aware(
    mix: MixForecast,
    intent: Intent,
    cfg: ValidatorConfig,
    qos_ok: bool,
    target_class_index: int,
) -> Verdict:
    """Invalidate a slice-boost intent when a foreign class is forecast to
    dominate for the whole duration window while the target class is already
    within SLA; otherwise defer to the KPI-centric validator."""
    if not intent.is_slice_boost:
        raise ValueError("slice-aware validation applies to slice-boost intents")
    if mix.horizon < cfg.dominance_duration:
        raise ValueError(
            f"forecast horizon {mix.horizon} shorter than dominance duration "
            f"{cfg.dominance_duration}"
        )
    bar = cfg.dominance_threshold - cfg.hysteresis
    window = mix.shares[: cfg.dominance_duration]
    dominant = None
    for c in range(mix.shares.shape[1]):
        if c == target_class_index:
            continue
        if np.all(window[:, c] >= bar):
            dominant = c
            break
    if dominant is not None and qos_ok:
        return Verdict(
            False,
            f"class {dominant} forecast to dominate (>= {bar:.3f}) for "
            f"{cfg.dominance_duration} steps while target class meets SLA",
        )
    return Verdict(True, "no foreign dominant class or target class below SLA")


@dataclass
class FeasibilityTable:
    """Supervised map (intent type, state signature) -> QoS-drift bit."""

    entries: dict[tuple[str, str], int] = field(default_factory=dict)
    counts: dict[tuple[str, str], int] = field(default_factory=dict)

    def lookup(self, intent_type: str, signature: StateSignature) -> int | None:
        return self.entries.get((intent_type, str(signature)))

    def save(self, path: str | Path) -> None:
        """Deterministic sorted text: one ``intent signature drift count`` line."""
        lines = [
            f"{itype} {sig} {self.entries[(itype, sig)]} {self.counts.get((itype, sig), 0)}"
            for itype, sig in sorted(self.entries)
        ]
        Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))

    @classmethod
    def load(cls, path: str | Path) -> "FeasibilityTable":
        table = cls()
        for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 4:
                raise ValueError(f"malformed feasibility line {lineno}")
            itype, sig, drift, count = parts
            table.entries[(itype, sig)] = int(drift)
            table.counts[(itype, sig)] = int(count)
        return table


def validate_kpi_centric(
    intent: Intent,
    signature: StateSignature,
    table: FeasibilityTable,
) -> Verdict:
    """Invalid iff the table records drift for this (intent, signature) key;
    unknown keys are treated as valid."""
    drift = table.lookup(intent.intent_type, signature)
    if drift == 1:
        return Verdict(False, f"known QoS drift for state {signature}")
    if drift == 0:
        return Verdict(True, f"state {signature} recorded safe")
    return Verdict(True, f"no feasibility record for state {signature}")


def learn_feasibility(
    records: list[tuple[str, StateSignature, int]],
) -> FeasibilityTable:
    """Majority vote per key; ties resolve conservatively to drift=1."""
    votes: dict[tuple[str, str], list[int]] = {}
    for intent_type, signature, drift in records:
        if drift not in (0, 1):
            raise ValueError("drift labels must be binary")
        votes.setdefault((intent_type, str(signature)), []).append(drift)
    table = FeasibilityTable()
    for key, labels in votes.items():
        ones = sum(labels)
        table.entries[key] = 1 if ones * 2 >= len(labels) else 0
        table.counts[key] = len(labels)
    return table

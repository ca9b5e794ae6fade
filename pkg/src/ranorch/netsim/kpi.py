"""Windowed KPI formulas over per-UE histories.

Histories are 1-indexed by step in the formulas; arrays store step ``i`` at
index ``i - 1``. ``buffer_history[i - 1]`` records end-of-step occupancy, so
the sliding-window loss denominator counts every bit that was present or
arrived during the window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class StructuralError(ValueError):
    """Raised when a history is missing or malformed."""


@dataclass
class UeState:
    """Per-UE snapshot plus the histories the windowed KPIs need."""

    ue_id: int
    slice_id: int
    buffer_bits: int
    spectral_efficiency: float
    head_of_line_delay: int
    cqi: int
    active: bool
    arrival_history: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    drop_history: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    served_history: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    buffer_history: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))


def packet_loss_rate(ue: UeState, n: int, m: int) -> float:
    """Packet loss over a sliding window of m steps ending at step n.

    Uses the full-window branch when n >= m, the partial branch otherwise.
    A zero denominator (no buffered or arrived bits) returns 0.
    """
    if n < 1 or len(ue.drop_history) < n or len(ue.arrival_history) < n:
        raise StructuralError("histories not populated up to n")
    if n >= m:
        num = int(ue.drop_history[n - m:n].sum())
        den = int(ue.buffer_history[n - m - 1]) if n - m >= 1 else 0
        den += int(ue.arrival_history[n - m:n].sum())
    else:
        num = int(ue.drop_history[:n].sum())
        den = int(ue.buffer_history[0]) + int(ue.arrival_history[:n].sum())
    if den == 0:
        return 0.0
    return num / den


def longterm_throughput(ue: UeState, n: int, m: int) -> float:
    """Mean served bits/step over the window ending at step n."""
    if n < 1 or len(ue.served_history) < n:
        raise StructuralError("served history not populated up to n")
    if n >= m:
        return float(ue.served_history[n - m:n].sum()) / m
    return float(ue.served_history[:n].sum()) / n


def nearest_rank_lower(values: np.ndarray, pct: float) -> float:
    """Percentile by nearest-rank-lower: sorted index floor(pct * (k-1))."""
    if len(values) == 0:
        raise StructuralError("empty series")
    ordered = np.sort(np.asarray(values))
    idx = math.floor(pct * (len(ordered) - 1))
    return float(ordered[idx])


def fifth_percentile(ue: UeState, n: int, m: int) -> float:
    """Fifth-percentile served bits/step over the window ending at step n."""
    if n < 1 or len(ue.served_history) < n:
        raise StructuralError("served history not populated up to n")
    window = ue.served_history[max(0, n - m):n]
    return nearest_rank_lower(window, 0.05)


def buffer_occupancy(ue: UeState, b_max: int) -> float:
    """Normalized occupancy b/b_max in [0, 1]."""
    return ue.buffer_bits / b_max


def check_slice_qos(kpis: dict[str, float], spec) -> dict[str, bool]:
    """One inclusive pass/fail per constraint of the slice's QoS contract."""
    result: dict[str, bool] = {}
    for name, (direction, bound) in spec.constraints.items():
        if name not in kpis:
            raise StructuralError(f"missing KPI {name!r} for slice type {spec.slice_type}")
        value = kpis[name]
        result[name] = value >= bound if direction == "ge" else value <= bound
    return result


def count_allocations(num_rbgs: int, num_slices: int) -> int:
    """Number of RBG allocation vectors: stars-and-bars count."""
    return math.comb(num_rbgs + num_slices - 1, num_slices - 1)

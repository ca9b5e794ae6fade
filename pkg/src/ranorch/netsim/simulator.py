"""One-cell, S-slice TTI simulator with traffic, buffers, and KPI windows.

All bit quantities are int64, so buffer balance and windowed sums are exact.
The per-TTI serving/buffer update runs in the selected kernel backend; the
surrounding traffic generation, link evolution, and KPI accounting are numpy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ranorch.config import Scenario, SimConfig
from ranorch.netsim.kernel import step_kernel
from ranorch.netsim.kpi import StructuralError, UeState, nearest_rank_lower


class ConstraintViolation(ValueError):
    """An allocation or assignment breaks a hard resource constraint."""


@dataclass(frozen=True)
class KpiSample:
    """Per-step KPI snapshot: per-slice rows plus system aggregates."""

    step: int
    per_slice: dict[int, dict[str, float]]
    system: dict[str, float]
    class_bits: dict[str, int]        # arrival bits per traffic class this step
    class_interarrival: dict[str, float]  # mean inter-arrival (ms) per class

    def flat(self) -> dict:
        row: dict = {"step": self.step}
        for sid, kpis in self.per_slice.items():
            for key, value in kpis.items():
                row[f"s{sid}_{key}"] = value
        row.update(self.system)
        for label, bits in self.class_bits.items():
            row[f"bits_{label}"] = bits
        return row


@dataclass(frozen=True)
class NetworkState:
    """Immutable simulator snapshot at one step."""

    step: int
    buffers: np.ndarray
    spectral_efficiency: np.ndarray
    head_of_line_delay: np.ndarray
    cqi: np.ndarray
    active: np.ndarray
    ue_slices: np.ndarray
    allocation: np.ndarray
    kpis: KpiSample | None


class Simulator:
    """Single-writer stepping; snapshots are safe to hand to readers."""

    def __init__(self, scenario: Scenario, record_history: bool = False):
        self.scenario = scenario
        cfg = scenario.sim
        self.cfg: SimConfig = cfg
        self.record_history = record_history

        U, S, m = cfg.num_ues, cfg.num_slices, cfg.kpi_window
        self.n = 0
        self.buf = np.zeros(U, dtype=np.int64)
        self.hol = np.zeros(U, dtype=np.int64)
        self.ue_slices = np.asarray(scenario.ue_slices, dtype=np.int64)
        self.slice_members = [np.flatnonzero(self.ue_slices == s) for s in range(S)]
        self.be_ues = np.flatnonzero(
            np.array([scenario.slices[s].slice_type == "BE" for s in self.ue_slices])
        )
        self.active = np.ones(U, dtype=bool)

        # Link model: bounded mean-reverting CQI walk mapped through the table.
        ss = np.random.SeedSequence(cfg.seed)
        child = ss.spawn(U + 3)
        self._traffic_rngs = [np.random.Generator(np.random.PCG64(child[u])) for u in range(U)]
        self._link_rng = np.random.Generator(np.random.PCG64(child[U]))
        self._be_rng = np.random.Generator(np.random.PCG64(child[U + 1]))
        self._base_cqi = self._link_rng.integers(4, 13, size=U)
        self.cqi = self._base_cqi.copy()
        self._se_table = np.asarray(cfg.cqi_se_table, dtype=np.float64)

        # Actuator/injection effect state (mutated only via apply_effects()).
        self.ue_se_scale = np.ones(U, dtype=np.float64)
        self.ue_arrival_scale = np.ones(U, dtype=np.float64)
        self.power_scale = 1.0
        self.extra_power_w = 0.0
        self.cells_active = np.ones(cfg.num_cells, dtype=bool)

        # Traffic: next-arrival clocks in ms, one per UE.
        self._next_arrival_ms = np.array(
            [self._draw_interarrival(u) for u in range(U)], dtype=np.float64
        )
        self._now_ms = 0.0

        # Window rings (length m) and exact running sums.
        self._ring_a = np.zeros((U, m), dtype=np.int64)
        self._ring_d = np.zeros((U, m), dtype=np.int64)
        self._ring_r = np.zeros((U, m), dtype=np.int64)
        self._ring_bend = np.zeros((U, m + 1), dtype=np.int64)
        self._sum_a = np.zeros(U, dtype=np.int64)
        self._sum_d = np.zeros(U, dtype=np.int64)
        self._sum_r = np.zeros(U, dtype=np.int64)
        self._bend_first = np.zeros(U, dtype=np.int64)   # b_u(1), end of step 1
        self._cum_a = np.zeros(U, dtype=np.int64)
        self._cum_d = np.zeros(U, dtype=np.int64)
        self._power_ring = np.zeros(m, dtype=np.float64)
        self._served_ring = np.zeros(m, dtype=np.int64)

        self.last_allocation = np.zeros(S, dtype=np.int64)
        self.last_kpis: KpiSample | None = None

        if record_history:
            self.hist_a: list[np.ndarray] = []
            self.hist_d: list[np.ndarray] = []
            self.hist_r: list[np.ndarray] = []
            self.hist_bend: list[np.ndarray] = []

    # ------------------------------------------------------------------ traffic

    def _draw_interarrival(self, u: int) -> float:
        model = self.scenario.ue_traffic[u]
        rng = self._traffic_rngs[u]
        mu = model.mean_interarrival_ms
        if model.distribution == "poisson":
            return float(rng.exponential(mu))
        if model.distribution == "uniform":
            return float(rng.uniform(0.5 * mu, 1.5 * mu))
        if model.distribution == "pareto":
            alpha = 2.5
            xm = mu * (alpha - 1.0) / alpha
            return float(xm * (1.0 + rng.pareto(alpha)))
        # lognormal, sigma fixed at 0.5
        sigma = 0.5
        return float(rng.lognormal(math.log(mu) - sigma * sigma / 2.0, sigma))

    def _generate_arrivals(self) -> np.ndarray:
        t_end = self._now_ms + self.cfg.tti_duration_s * 1000.0
        arrivals = np.zeros(self.cfg.num_ues, dtype=np.int64)
        for u in range(self.cfg.num_ues):
            if not self.active[u]:
                # Clock keeps running so reactivation does not burst.
                while self._next_arrival_ms[u] < t_end:
                    self._next_arrival_ms[u] += self._draw_interarrival(u)
                continue
            bits = 0
            payload = self.scenario.ue_traffic[u].payload_bits
            while self._next_arrival_ms[u] < t_end:
                bits += payload
                self._next_arrival_ms[u] += self._draw_interarrival(u)
            if bits and self.ue_arrival_scale[u] != 1.0:
                bits = int(round(bits * self.ue_arrival_scale[u]))
            arrivals[u] = bits
        self._now_ms = t_end
        return arrivals

    def _evolve_link(self) -> None:
        rng = self._link_rng
        U = self.cfg.num_ues
        revert = rng.random(U) < self.cfg.cqi_revert_prob
        toward = np.sign(self._base_cqi - self.cqi)
        walk = rng.integers(-1, 2, size=U)
        step = np.where(revert, toward, walk)
        self.cqi = np.clip(self.cqi + step, 0, len(self._se_table) - 1)

    @property
    def spectral_efficiency(self) -> np.ndarray:
        se = self._se_table[self.cqi] * self.cfg.interference_penalty * self.ue_se_scale
        return np.maximum(se, 0.0)

    # ------------------------------------------------------------------ stepping

    def step(self, allocation: np.ndarray, assignments: np.ndarray) -> KpiSample:
        """Advance one TTI.

        allocation: per-slice RBG counts summing to R.
        assignments: per-UE RBG counts; per-slice sums must equal the budgets.
        """
        cfg = self.cfg
        allocation = np.asarray(allocation, dtype=np.int64)
        assignments = np.asarray(assignments, dtype=np.int64)
        if allocation.shape != (cfg.num_slices,) or int(allocation.sum()) != cfg.num_rbgs:
            raise ConstraintViolation(f"allocation must sum to {cfg.num_rbgs}")
        if assignments.shape != (cfg.num_ues,):
            raise StructuralError("assignments must cover every UE")
        for s in range(cfg.num_slices):
            if int(assignments[self.slice_members[s]].sum()) != int(allocation[s]):
                raise ConstraintViolation(f"slice {s} assignments exceed budget")

        self.n += 1
        if self.be_ues.size and (self.n - 1) % cfg.be_toggle_period == 0:
            self.active[self.be_ues] = self._be_rng.random(self.be_ues.size) < 0.5

        self._evolve_link()
        se = self.spectral_efficiency
        arrivals = self._generate_arrivals()

        eff, drops = step_kernel(
            self.buf, self.hol, assignments, se, arrivals,
            cfg.rbg_bandwidth_hz, cfg.tti_duration_s, cfg.packet_size_bits,
            cfg.buffer_capacity_bits, cfg.max_latency_ttis,
        )

        m = cfg.kpi_window
        slot = (self.n - 1) % m
        self._sum_a += arrivals - self._ring_a[:, slot]
        self._sum_d += drops - self._ring_d[:, slot]
        self._sum_r += eff - self._ring_r[:, slot]
        self._ring_a[:, slot] = arrivals
        self._ring_d[:, slot] = drops
        self._ring_r[:, slot] = eff
        self._ring_bend[:, self.n % (m + 1)] = self.buf
        self._cum_a += arrivals
        self._cum_d += drops
        if self.n == 1:
            self._bend_first[:] = self.buf

        active_rbgs = int(assignments[eff > 0].sum())
        power = (
            cfg.base_power_w * int(self.cells_active.sum())
            + cfg.rbg_power_w * active_rbgs * self.power_scale
            + self.extra_power_w
        )
        self._power_ring[slot] = power
        self._served_ring[slot] = int(eff.sum())

        if self.record_history:
            self.hist_a.append(arrivals.copy())
            self.hist_d.append(drops.copy())
            self.hist_r.append(eff.copy())
            self.hist_bend.append(self.buf.copy())

        self.last_allocation = allocation.copy()
        self.last_kpis = self._compute_kpis(eff, arrivals, power)
        return self.last_kpis

    # ------------------------------------------------------------------ KPIs

    def _loss_terms(self, ues: np.ndarray) -> tuple[int, int]:
        """Aggregate sliding-window loss numerator/denominator for a UE set."""
        m = self.cfg.kpi_window
        if self.n >= m:
            num = int(self._sum_d[ues].sum())
            bend = self._ring_bend[ues, (self.n - m) % (m + 1)] if self.n > m else 0
            den = int(np.sum(bend)) + int(self._sum_a[ues].sum())
        else:
            num = int(self._cum_d[ues].sum())
            den = int(self._bend_first[ues].sum()) + int(self._cum_a[ues].sum())
        return num, den

    def _compute_kpis(self, eff: np.ndarray, arrivals: np.ndarray, power: float) -> KpiSample:
        cfg = self.cfg
        m = cfg.kpi_window
        window = min(self.n, m)
        per_slice: dict[int, dict[str, float]] = {}
        for s in range(cfg.num_slices):
            ues = self.slice_members[s]
            num, den = self._loss_terms(ues)
            pooled = self._ring_r[ues, :window].ravel()
            per_slice[s] = {
                "throughput": float(self._sum_r[ues].sum()) / window,
                "latency": float(self.hol[ues].mean()) if ues.size else 0.0,
                "loss": (num / den) if den else 0.0,
                "longterm_throughput": float(self._sum_r[ues].sum()) / window / max(ues.size, 1),
                "fifth_pct_throughput": nearest_rank_lower(pooled, 0.05) if pooled.size else 0.0,
                "buffer_occupancy": float(self.buf[ues].mean()) / cfg.buffer_capacity_bits
                if ues.size else 0.0,
            }
        num, den = self._loss_terms(np.arange(cfg.num_ues))
        energy_j = float(self._power_ring[:window].sum()) * cfg.tti_duration_s
        served_window = int(self._served_ring[:window].sum())
        system = {
            "throughput": float(self._sum_r.sum()) / window,
            "latency": float(self.hol.mean()),
            "loss": (num / den) if den else 0.0,
            "power_w": power,
            "energy_efficiency": served_window / energy_j if energy_j > 0 else 0.0,
            "load": float(self._sum_a.sum()) / window if self.n >= m
            else float(self._cum_a.sum()) / max(self.n, 1),
        }
        class_bits: dict[str, int] = {}
        class_ia: dict[str, float] = {}
        for u in range(cfg.num_ues):
            label = self.scenario.ue_traffic[u].label
            class_bits[label] = class_bits.get(label, 0) + int(arrivals[u])
            class_ia.setdefault(label, self.scenario.ue_traffic[u].mean_interarrival_ms)
        return KpiSample(self.n, per_slice, system, class_bits, class_ia)

    # ------------------------------------------------------------------ views

    def snapshot(self) -> NetworkState:
        return NetworkState(
            step=self.n,
            buffers=self.buf.copy(),
            spectral_efficiency=self.spectral_efficiency,
            head_of_line_delay=self.hol.copy(),
            cqi=self.cqi.copy(),
            active=self.active.copy(),
            ue_slices=self.ue_slices.copy(),
            allocation=self.last_allocation.copy(),
            kpis=self.last_kpis,
        )

    def ue_state(self, u: int) -> UeState:
        """Full-history UE view; requires record_history=True."""
        if not 0 <= u < self.cfg.num_ues:
            raise StructuralError(f"unknown UE id {u}")
        if not self.record_history:
            raise StructuralError("simulator was not recording histories")
        return UeState(
            ue_id=u,
            slice_id=int(self.ue_slices[u]),
            buffer_bits=int(self.buf[u]),
            spectral_efficiency=float(self.spectral_efficiency[u]),
            head_of_line_delay=int(self.hol[u]),
            cqi=int(self.cqi[u]),
            active=bool(self.active[u]),
            arrival_history=np.array([h[u] for h in self.hist_a], dtype=np.int64),
            drop_history=np.array([h[u] for h in self.hist_d], dtype=np.int64),
            served_history=np.array([h[u] for h in self.hist_r], dtype=np.int64),
            buffer_history=np.array([h[u] for h in self.hist_bend], dtype=np.int64),
        )

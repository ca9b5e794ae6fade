"""Inter-slice RBG apportionment and intra-slice micro-scheduling.

The inter-slice MDP (state = deficits/load/current allocation, action = a
pruned candidate allocation, reward = mean SLA-compliance) is defined here;
the heuristic mode is weighted largest-remainder apportionment over priority
weights scaled by unmet QoS deficit.
"""

from __future__ import annotations

import hashlib
import pickle
from dataclasses import dataclass, field

import numpy as np

from ranorch.netsim.kpi import StructuralError


class RewardDomainError(ValueError):
    """Micro-state feature outside [0, 1]."""


# ------------------------------------------------------------------ inter-slice


def apportion(weights: np.ndarray, num_rbgs: int) -> np.ndarray:
    """Weighted largest-remainder apportionment; ties break to lowest index."""
    weights = np.asarray(weights, dtype=np.float64)
    if np.any(weights < 0):
        raise ValueError("weights must be nonnegative")
    total = weights.sum()
    if total <= 0:
        raise ValueError("at least one weight must be positive")
    quota = num_rbgs * weights / total
    base = np.floor(quota).astype(np.int64)
    remaining = num_rbgs - int(base.sum())
    if remaining:
        # Sort by descending remainder, lowest index first on ties.
        order = sorted(range(len(weights)), key=lambda i: (-(quota[i] - base[i]), i))
        for i in order[:remaining]:
            base[i] += 1
    return base


def deficit_vector(slice_kpis: dict[int, dict[str, float]], specs) -> np.ndarray:
    """Per-slice normalized unmet-QoS deficit, each term clipped to [0, 1]."""
    out = np.zeros(len(specs), dtype=np.float64)
    for spec in specs:
        kpis = slice_kpis.get(spec.slice_id, {})
        total = 0.0
        for name, (direction, bound) in spec.constraints.items():
            value = kpis.get(name)
            if value is None or bound <= 0:
                continue
            gap = (bound - value) / bound if direction == "ge" else (value - bound) / bound
            total += min(max(gap, 0.0), 1.0)
        out[spec.slice_id] = total
    return out


def allocate_inter(
    slice_kpis: dict[int, dict[str, float]],
    specs,
    weights: np.ndarray,
    num_rbgs: int,
    policy: "SchedulerPolicy | None" = None,
) -> np.ndarray:
    """Valid allocation vector over slices.

    Heuristic mode scales the priority weights by (1 + deficit) and
    apportions; learned mode picks among the pruned candidate set.
    """
    weights = np.asarray(weights, dtype=np.float64)
    deficits = deficit_vector(slice_kpis, specs)
    scaled = weights * (1.0 + deficits)
    if not np.any(scaled > 0):
        raise ValueError("all-zero effective weights")
    anchor = apportion(scaled, num_rbgs)
    if policy is None or policy.kind == "heuristic":
        return anchor
    candidates = candidate_allocations(anchor, num_rbgs)
    return policy.choose_allocation(deficits, candidates)


def candidate_allocations(anchor: np.ndarray, num_rbgs: int) -> list[tuple[int, ...]]:
    """Anchor plus all single-RBG transfers between slice pairs."""
    out = [tuple(int(x) for x in anchor)]
    S = len(anchor)
    for i in range(S):
        if anchor[i] == 0:
            continue
        for j in range(S):
            if i == j:
                continue
            cand = anchor.copy()
            cand[i] -= 1
            cand[j] += 1
            out.append(tuple(int(x) for x in cand))
    return out


# ------------------------------------------------------------------ intra-slice


@dataclass
class IntraMicroState:
    """Normalized features for one micro-decision inside a slice."""

    slice_type: str
    queues: np.ndarray                    # normalized buffer occupancies
    channels: np.ndarray                  # normalized channel qualities
    delays: np.ndarray | None = None      # URLLC head-of-line delays / l_max
    shares: np.ndarray | None = None      # eMBB/BE per-UE RBG shares
    mean_share: float = 0.0
    budget: int = 0
    micro_step: int = 1

    def validate(self) -> None:
        for arr in (self.queues, self.channels, self.delays, self.shares):
            if arr is not None and (np.any(arr < 0) or np.any(arr > 1)):
                raise RewardDomainError("micro-state features must lie in [0, 1]")
        if not 1 <= self.micro_step <= max(self.budget, 1):
            raise RewardDomainError("micro-step index outside budget")


def intra_reward(slice_type: str, served: dict[str, float]) -> float:
    """Bounded per-micro-step reward for the served UE's normalized features."""
    if slice_type == "URLLC":
        x = served["delay"]
    elif slice_type == "eMBB":
        x = served["queue"]
    else:
        x = served["share"]
    if not 0.0 <= x <= 1.0:
        raise RewardDomainError("features must be normalized to [0, 1]")
    if slice_type == "URLLC":
        return 1.0 - 2.0 * x
    if slice_type == "eMBB":
        return 2.0 * x - 1.0
    mean = served["mean_share"]
    if not 0.0 <= mean <= 1.0:
        raise RewardDomainError("mean share must be normalized to [0, 1]")
    return 1.0 - 2.0 * abs(x - mean)


def urgency_scores(state: IntraMicroState) -> np.ndarray:
    """Greedy per-UE score aligned with the slice reward.

    URLLC serves the most-delayed UE, eMBB the fullest buffer, BE the most
    under-served share. Argmax of these scores is the greedy policy.
    """
    if state.slice_type == "URLLC":
        if state.delays is None:
            raise StructuralError("URLLC micro-state requires delays")
        return np.asarray(state.delays, dtype=np.float64)
    if state.slice_type == "eMBB":
        return np.asarray(state.queues, dtype=np.float64)
    if state.shares is None:
        raise StructuralError("BE micro-state requires shares")
    return state.mean_share - np.asarray(state.shares, dtype=np.float64)


def micro_schedule(state: IntraMicroState, policy: "SchedulerPolicy | None" = None) -> int:
    """Pick the UE to serve at this micro-step; ties break to lowest index."""
    if len(state.queues) == 0:
        raise StructuralError("empty slice")
    state.validate()
    if policy is not None and policy.kind == "learned":
        return policy.choose_ue(state)
    scores = urgency_scores(state)
    return int(np.argmax(scores))  # argmax returns the first (lowest) index on ties


@dataclass
class SchedulerPolicy:
    """Heuristic or tabular learned policy behind one interface."""

    kind: str = "heuristic"
    exploration: float = 0.0
    q_table: dict = field(default_factory=dict)
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in ("heuristic", "learned"):
            raise ValueError(f"unknown policy kind {self.kind!r}")
        self._rng = np.random.Generator(np.random.PCG64(self.rng_seed))

    def choose_allocation(self, deficits: np.ndarray, candidates: list[tuple[int, ...]]):
        key = tuple(np.round(deficits, 1))
        if self.exploration > 0 and self._rng.random() < self.exploration:
            idx = int(self._rng.integers(len(candidates)))
            return np.asarray(candidates[idx], dtype=np.int64)
        scores = [self.q_table.get((key, cand), 0.0) for cand in candidates]
        best = int(np.argmax(scores))
        return np.asarray(candidates[best], dtype=np.int64)

    def update_allocation_value(self, deficits: np.ndarray, cand: tuple[int, ...],
                                reward: float, lr: float = 0.2) -> None:
        key = (tuple(np.round(deficits, 1)), cand)
        old = self.q_table.get(key, 0.0)
        self.q_table[key] = old + lr * (reward - old)

    def choose_ue(self, state: IntraMicroState) -> int:
        if self.exploration > 0 and self._rng.random() < self.exploration:
            return int(self._rng.integers(len(state.queues)))
        scores = urgency_scores(state)
        learned = np.array(
            [self.q_table.get((state.slice_type, i), 0.0) for i in range(len(scores))]
        )
        return int(np.argmax(scores + learned))


# ------------------------------------------------------------------ checkpoints

_CHECKPOINT_VERSION = 1


def save_policy(policy: SchedulerPolicy, path, config_hash: str) -> None:
    blob = pickle.dumps({"kind": policy.kind, "exploration": policy.exploration,
                         "q_table": policy.q_table, "rng_seed": policy.rng_seed})
    digest = hashlib.sha256(blob).hexdigest()[:16]
    with open(path, "wb") as fh:
        header = f"ranorch-policy v{_CHECKPOINT_VERSION} {config_hash} {digest}\n"
        fh.write(header.encode())
        fh.write(blob)


def load_policy(path, config_hash: str) -> SchedulerPolicy:
    with open(path, "rb") as fh:
        header = fh.readline().decode().split()
        blob = fh.read()
    if header[0] != "ranorch-policy" or header[1] != f"v{_CHECKPOINT_VERSION}":
        raise ValueError("not a policy checkpoint")
    if header[2] != config_hash:
        raise ValueError(f"config hash mismatch: checkpoint {header[2]}, scenario {config_hash}")
    if hashlib.sha256(blob).hexdigest()[:16] != header[3]:
        raise ValueError("checkpoint payload corrupted")
    data = pickle.loads(blob)
    return SchedulerPolicy(kind=data["kind"], exploration=data["exploration"],
                           q_table=data["q_table"], rng_seed=data["rng_seed"])


# ------------------------------------------------------------------ full TTI assignment


def build_assignments(sim, allocation: np.ndarray,
                      policy: SchedulerPolicy | None = None) -> np.ndarray:
    """Run R_s micro-steps per slice; returns per-UE RBG counts."""
    cfg = sim.cfg
    counts = np.zeros(cfg.num_ues, dtype=np.int64)
    se = sim.spectral_efficiency
    se_max = max(float(se.max()), 1e-9)
    for s in range(cfg.num_slices):
        members = sim.slice_members[s]
        budget = int(allocation[s])
        if budget == 0 or members.size == 0:
            continue
        stype = sim.scenario.slices[s].slice_type
        queues = sim.buf[members] / cfg.buffer_capacity_bits
        channels = se[members] / se_max
        delays = sim.hol[members] / cfg.max_latency_ttis
        local = np.zeros(members.size, dtype=np.int64)
        for kappa in range(1, budget + 1):
            shares = local / budget
            state = IntraMicroState(
                slice_type=stype,
                queues=np.clip(queues, 0.0, 1.0),
                channels=np.clip(channels, 0.0, 1.0),
                delays=np.clip(delays, 0.0, 1.0) if stype == "URLLC" else None,
                shares=shares if stype in ("eMBB", "BE") else None,
                mean_share=float(shares.mean()),
                budget=budget,
                micro_step=kappa,
            )
            pick = micro_schedule(state, policy)
            local[pick] += 1
            # Serving decays the urgency features for subsequent micro-steps.
            if stype == "URLLC":
                delays[pick] = 0.0
            else:
                served = (cfg.rbg_bandwidth_hz * se[members][pick] * cfg.tti_duration_s)
                queues[pick] = max(queues[pick] - served / cfg.buffer_capacity_bits, 0.0)
        counts[members] = local
    return counts

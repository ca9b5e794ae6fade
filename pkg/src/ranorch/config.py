"""Simulation configuration, slice QoS contracts, traffic models, and scenario files.

Scenario files are TOML: a ``[sim]`` section for the cell-level parameters,
``[[slices]]`` entries for QoS contracts, and ``[[traffic]]`` entries mapping
UE groups to traffic classes.
"""

from __future__ import annotations

import hashlib
import json
try:
    import tomllib
except ModuleNotFoundError:      # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field, asdict
from pathlib import Path


class ConfigError(ValueError):
    """Raised when a configuration violates a structural invariant."""


SLICE_TYPES = ("eMBB", "URLLC", "BE")

TRAFFIC_CLASSES = ("video", "gaming", "voice", "urllc", "web")

# Mean packet inter-arrival per traffic class (milliseconds) and the
# distribution family of the arrival process.
DEFAULT_TRAFFIC = {
    "video": ("pareto", 12.5),
    "gaming": ("uniform", 40.0),
    "voice": ("poisson", 20.0),
    "urllc": ("poisson", 0.5),
    "web": ("lognormal", 30.0),
}

# Wideband CQI index -> spectral efficiency (bits/s/Hz). Config-level default;
# roughly follows the 4-bit CQI table shape without claiming PHY fidelity.
DEFAULT_CQI_SE_TABLE = (
    0.15, 0.23, 0.38, 0.60, 0.88, 1.18, 1.48, 1.91,
    2.41, 2.73, 3.32, 3.90, 4.52, 5.12, 5.55,
)


@dataclass(frozen=True)
class SimConfig:
    """Cell-level simulator parameters; one scheduling step = one TTI."""

    num_cells: int = 7
    num_slices: int = 3
    num_ues: int = 12
    num_rbgs: int = 17
    rbg_bandwidth_hz: float = 360_000.0
    tti_duration_s: float = 0.001
    packet_size_bits: int = 400
    buffer_capacity_bits: int = 200_000
    max_latency_ttis: int = 20
    kpi_window: int = 50
    be_toggle_period: int = 100
    seed: int = 0
    # Link model knobs (the wideband CQI model has no SINR formula; the SE
    # random walk and interference penalty live here).
    cqi_se_table: tuple[float, ...] = DEFAULT_CQI_SE_TABLE
    interference_penalty: float = 1.0
    cqi_revert_prob: float = 0.3
    # Power model: per-cell base watts + per-active-RBG increment.
    base_power_w: float = 100.0
    rbg_power_w: float = 1.0
    # Inert metadata carried for completeness; no equation role.
    num_tx_antennas: int = 64
    num_rx_antennas: int = 2
    carrier_frequency_ghz: float = 3.5

    def __post_init__(self) -> None:
        for name in ("num_cells", "num_slices", "num_ues", "num_rbgs",
                     "max_latency_ttis", "kpi_window", "be_toggle_period"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.packet_size_bits <= 0:
            raise ConfigError("packet_size_bits must be > 0")
        if self.buffer_capacity_bits < self.packet_size_bits:
            raise ConfigError("buffer_capacity_bits must hold at least one packet")
        if self.rbg_bandwidth_hz <= 0 or self.tti_duration_s <= 0:
            raise ConfigError("rbg_bandwidth_hz and tti_duration_s must be > 0")
        if not 0.0 < self.interference_penalty <= 1.0:
            raise ConfigError("interference_penalty must be in (0, 1]")


@dataclass(frozen=True)
class SliceSpec:
    """QoS contract for one slice.

    eMBB and URLLC carry (throughput, latency, loss) targets; BE carries
    (long-term throughput, fifth-percentile throughput) targets.
    """

    slice_id: int
    slice_type: str
    throughput_req: float = 0.0       # bits/step, eMBB/URLLC
    latency_req: float = 0.0          # TTIs, eMBB/URLLC
    loss_req: float = 0.0             # ratio, eMBB/URLLC
    longterm_req: float = 0.0         # bits/step, BE
    fifth_pct_req: float = 0.0        # bits/step, BE

    def __post_init__(self) -> None:
        if self.slice_type not in SLICE_TYPES:
            raise ConfigError(f"unknown slice type {self.slice_type!r}")
        for name in ("throughput_req", "latency_req", "loss_req",
                     "longterm_req", "fifth_pct_req"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be nonnegative")

    @property
    def constraints(self) -> dict[str, tuple[str, float]]:
        """Constraint name -> (direction, bound); direction 'ge' or 'le'."""
        if self.slice_type == "BE":
            return {
                "longterm_throughput": ("ge", self.longterm_req),
                "fifth_pct_throughput": ("ge", self.fifth_pct_req),
            }
        return {
            "throughput": ("ge", self.throughput_req),
            "latency": ("le", self.latency_req),
            "loss": ("le", self.loss_req),
        }


@dataclass(frozen=True)
class TrafficModel:
    """Arrival process for one traffic class."""

    label: str
    distribution: str
    mean_interarrival_ms: float
    payload_bits: int = 400

    def __post_init__(self) -> None:
        if self.label not in TRAFFIC_CLASSES:
            raise ConfigError(f"unknown traffic class {self.label!r}")
        if self.distribution not in ("pareto", "uniform", "poisson", "lognormal"):
            raise ConfigError(f"unknown distribution {self.distribution!r}")
        if self.mean_interarrival_ms <= 0:
            raise ConfigError("mean_interarrival_ms must be > 0")
        if self.payload_bits <= 0:
            raise ConfigError("payload_bits must be > 0")

    @classmethod
    def for_class(cls, label: str, payload_bits: int = 400,
                  mean_interarrival_ms: float | None = None) -> "TrafficModel":
        dist, default_mean = DEFAULT_TRAFFIC[label]
        return cls(label, dist, mean_interarrival_ms or default_mean, payload_bits)


@dataclass(frozen=True)
class Scenario:
    """Full parsed scenario: sim config, slice contracts, per-UE traffic."""

    sim: SimConfig
    slices: tuple[SliceSpec, ...]
    ue_slices: tuple[int, ...]          # UE index -> slice id
    ue_traffic: tuple[TrafficModel, ...]  # UE index -> traffic model
    app_catalog: tuple[str, ...] = ()
    app_costs: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if len(self.slices) != self.sim.num_slices:
            raise ConfigError("slice count does not match num_slices")
        if len(self.ue_slices) != self.sim.num_ues or len(self.ue_traffic) != self.sim.num_ues:
            raise ConfigError("per-UE tables must cover all UEs")
        if any(s < 0 or s >= self.sim.num_slices for s in self.ue_slices):
            raise ConfigError("UE mapped to unknown slice")

    def config_hash(self) -> str:
        blob = json.dumps(
            {
                "sim": asdict(self.sim),
                "slices": [asdict(s) for s in self.slices],
                "ue_slices": list(self.ue_slices),
                "ue_traffic": [asdict(t) for t in self.ue_traffic],
            },
            sort_keys=True,
        )
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


# Traffic class considered typical for each slice type when a scenario does
# not pin one explicitly.
_SLICE_DEFAULT_CLASS = {"eMBB": "video", "URLLC": "urllc", "BE": "web"}


def default_scenario(seed: int = 0, num_ues: int = 12, num_rbgs: int = 17,
                     **sim_overrides) -> Scenario:
    """Three-slice scenario (eMBB/URLLC/BE) with UEs spread round-robin."""
    sim = SimConfig(num_ues=num_ues, num_rbgs=num_rbgs, seed=seed, **sim_overrides)
    slices = (
        SliceSpec(0, "eMBB", throughput_req=3000.0, latency_req=15.0, loss_req=0.05),
        SliceSpec(1, "URLLC", throughput_req=400.0, latency_req=4.0, loss_req=0.01),
        SliceSpec(2, "BE", longterm_req=200.0, fifth_pct_req=0.0),
    )
    ue_slices = tuple(u % 3 for u in range(num_ues))
    ue_traffic = tuple(
        TrafficModel.for_class(_SLICE_DEFAULT_CLASS[slices[s].slice_type],
                               payload_bits=sim.packet_size_bits)
        for s in ue_slices
    )
    return Scenario(sim=sim, slices=slices, ue_slices=ue_slices, ue_traffic=ue_traffic,
                    app_catalog=("steer", "sleep", "power", "beam", "handover"))


def load_scenario(path: str | Path) -> Scenario:
    """Parse a TOML scenario file."""
    path = Path(path)
    with path.open("rb") as fh:
        doc = tomllib.load(fh)

    sim_kwargs = dict(doc.get("sim", {}))
    if "cqi_se_table" in sim_kwargs:
        sim_kwargs["cqi_se_table"] = tuple(sim_kwargs["cqi_se_table"])
    sim = SimConfig(**sim_kwargs)

    slices = []
    for idx, sec in enumerate(doc.get("slices", [])):
        sec = dict(sec)
        sec.setdefault("slice_id", idx)
        slices.append(SliceSpec(**sec))

    ue_slices: list[int] = []
    ue_traffic: list[TrafficModel] = []
    for sec in doc.get("traffic", []):
        count = int(sec.get("count", 1))
        model = TrafficModel(
            label=sec["class"],
            distribution=sec.get("distribution", DEFAULT_TRAFFIC[sec["class"]][0]),
            mean_interarrival_ms=float(
                sec.get("mean_interarrival_ms", DEFAULT_TRAFFIC[sec["class"]][1])
            ),
            payload_bits=int(sec.get("payload_bits", sim.packet_size_bits)),
        )
        for _ in range(count):
            ue_slices.append(int(sec["slice"]))
            ue_traffic.append(model)

    apps = doc.get("apps", {})
    return Scenario(
        sim=sim,
        slices=tuple(slices),
        ue_slices=tuple(ue_slices),
        ue_traffic=tuple(ue_traffic),
        app_catalog=tuple(apps.get("catalog", ("steer", "sleep", "power", "beam", "handover"))),
        app_costs=dict(apps.get("costs", {})),
    )


def dump_scenario(scenario: Scenario, path: str | Path) -> None:
    """Write a scenario back out as TOML (used by the reproduction scripts)."""
    lines = ["[sim]"]
    for key, value in asdict(scenario.sim).items():
        if isinstance(value, str):
            lines.append(f'{key} = "{value}"')
        elif isinstance(value, (tuple, list)):
            lines.append(f"{key} = {list(value)}")
        else:
            lines.append(f"{key} = {value}")
    for spec in scenario.slices:
        lines.append("")
        lines.append("[[slices]]")
        for key, value in asdict(spec).items():
            if isinstance(value, str):
                lines.append(f'{key} = "{value}"')
            else:
                lines.append(f"{key} = {value}")
    # Group identical consecutive traffic models per slice.
    groups: list[tuple[int, TrafficModel, int]] = []
    for sl, tm in zip(scenario.ue_slices, scenario.ue_traffic):
        if groups and groups[-1][0] == sl and groups[-1][1] == tm:
            groups[-1] = (sl, tm, groups[-1][2] + 1)
        else:
            groups.append((sl, tm, 1))
    for sl, tm, count in groups:
        lines.append("")
        lines.append("[[traffic]]")
        lines.append(f"slice = {sl}")
        lines.append(f'class = "{tm.label}"')
        lines.append(f'distribution = "{tm.distribution}"')
        lines.append(f"mean_interarrival_ms = {tm.mean_interarrival_ms}")
        lines.append(f"payload_bits = {tm.payload_bits}")
        lines.append(f"count = {count}")
    if scenario.app_catalog:
        lines.append("")
        lines.append("[apps]")
        lines.append(f"catalog = {list(scenario.app_catalog)}")
    Path(path).write_text("\n".join(lines) + "\n")

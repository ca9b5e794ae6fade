"""Run manifests binding logs to the scenario, seed, and checkpoints."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, asdict, field
from pathlib import Path

import ranorch
from ranorch.netsim.kernel import KERNEL_BACKEND


class ManifestError(ValueError):
    pass


def file_digest(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()[:16]


@dataclass(frozen=True)
class RunManifest:
    scenario_hash: str
    seed: int
    horizon_epochs: int
    epoch_ttis: int
    kernel_backend: str = KERNEL_BACKEND
    version: str = ranorch.__version__
    checkpoints: dict = field(default_factory=dict)   # name -> digest
    intents: dict = field(default_factory=dict)       # epoch (int) -> intent text
    events: list = field(default_factory=list)        # degradation schedule rows

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(asdict(self), sort_keys=True, indent=2) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "RunManifest":
        data = json.loads(Path(path).read_text())
        data["intents"] = {int(k): v for k, v in data.get("intents", {}).items()}
        return cls(**data)

    def check_scenario(self, scenario) -> None:
        if scenario.config_hash() != self.scenario_hash:
            raise ManifestError(
                f"scenario hash {scenario.config_hash()} does not match "
                f"manifest {self.scenario_hash}"
            )

    def check_checkpoint(self, name: str, path: str | Path) -> None:
        want = self.checkpoints.get(name)
        if want is None:
            raise ManifestError(f"manifest has no checkpoint named {name!r}")
        got = file_digest(path)
        if got != want:
            raise ManifestError(f"checkpoint {name!r} digest {got} != manifest {want}")

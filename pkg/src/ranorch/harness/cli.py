"""Command-line entry points: run, report, serve, replay, bench."""

from __future__ import annotations

import hashlib
import sys
import tempfile
from pathlib import Path

import click

from ranorch.config import default_scenario, load_scenario
from ranorch.harness.manifest import RunManifest
from ranorch.harness.report import export_report
from ranorch.harness.runner import parse_event_schedule, run


def _load(scenario_path: str | None, seed: int):
    if scenario_path:
        return load_scenario(scenario_path)
    return default_scenario(seed=seed)


@click.group()
def main() -> None:
    """Intent-driven RAN-slicing simulator and orchestration engine."""


@main.command("run")
@click.option("--scenario", "scenario_path", type=click.Path(exists=True), default=None)
@click.option("--seed", type=int, default=0)
@click.option("--epochs", type=int, default=50)
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--intent", "intents", multiple=True,
              help="EPOCH:TEXT, e.g. '5:increase throughput by 10%'")
@click.option("--events", "events_path", type=click.Path(exists=True), default=None,
              help="Degradation schedule file")
def run_cmd(scenario_path, seed, epochs, out_dir, intents, events_path) -> None:
    """Run the closed loop and write JSONL logs plus a manifest."""
    scenario = _load(scenario_path, seed)
    intent_map = {}
    for item in intents:
        epoch, _, text = item.partition(":")
        intent_map[int(epoch)] = text
    specs = None
    if events_path:
        specs = parse_event_schedule(Path(events_path).read_text())
    result = run(scenario, epochs, out_dir, intents=intent_map, event_specs=specs)
    click.echo(f"wrote {len(result.events)} epochs to {out_dir}")


@main.command("report")
@click.option("--run-dir", type=click.Path(exists=True), required=True)
@click.option("--out", "out_dir", type=click.Path(), default=None)
def report_cmd(run_dir, out_dir) -> None:
    """Summarize a finished run into CSV tables."""
    summary = export_report(run_dir, out_dir)
    click.echo(f"epochs: {len(summary['epochs'])}")
    for itype, row in sorted(summary["validation"].items()):
        click.echo(f"validation {itype}: allowed={row['allowed']} blocked={row['blocked']}")
    for kpi, row in sorted(summary["recovery"].items()):
        click.echo(f"recovery {kpi}: pass={row['pass']} fail={row['fail']}")


@main.command("serve")
@click.option("--scenario", "scenario_path", type=click.Path(exists=True), default=None)
@click.option("--seed", type=int, default=0)
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8340)
def serve_cmd(scenario_path, seed, host, port) -> None:
    """Serve the HTTP control surface."""
    import uvicorn

    from ranorch.harness.service import create_app

    app = create_app(_load(scenario_path, seed))
    uvicorn.run(app, host=host, port=port, log_level="warning")


def _log_digests(run_dir: Path) -> dict[str, str]:
    out = {}
    for name in ("kpis.jsonl", "events.jsonl", "recovery.jsonl"):
        path = run_dir / name
        if path.exists():
            out[name] = hashlib.sha256(path.read_bytes()).hexdigest()
    return out


@main.command("replay")
@click.option("--run-dir", type=click.Path(exists=True), required=True)
@click.option("--scenario", "scenario_path", type=click.Path(exists=True), default=None)
def replay_cmd(run_dir, scenario_path) -> None:
    """Re-run a logged run from its manifest and verify byte-identical logs."""
    run_dir = Path(run_dir)
    manifest = RunManifest.load(run_dir / "manifest.json")
    scenario = _load(scenario_path, manifest.seed)
    manifest.check_scenario(scenario)
    original = _log_digests(run_dir)
    from ranorch.harness.runner import EventSpec

    specs = [EventSpec(k, m, s, d, t) for k, m, s, d, t in manifest.events]
    with tempfile.TemporaryDirectory() as tmp:
        run(scenario, manifest.horizon_epochs, tmp,
            intents=manifest.intents, event_specs=specs)
        fresh = _log_digests(Path(tmp))
    mismatched = [name for name in original if original[name] != fresh.get(name)]
    if mismatched:
        click.echo(f"REPLAY MISMATCH: {', '.join(mismatched)}")
        sys.exit(1)
    click.echo("replay verified: logs are byte-identical")


@main.command("bench")
@click.option("--steps", type=int, default=20000)
def bench_cmd(steps) -> None:
    """Compare the compiled and pure-Python kernels."""
    from ranorch.netsim.bench import run_bench

    for line in run_bench(steps):
        click.echo(line)

"""Offline report generation: a pure function of the run logs."""

from __future__ import annotations

import csv
from pathlib import Path

from ranorch.harness.logs import read_jsonl


def agent_columns(events: list[dict]) -> list[str]:
    agents = {a for ev in events for a, _ in ev.get("activations", [])}
    return sorted(agents)


def activation_heatmap(events: list[dict]) -> tuple[list[str], list[list[int]]]:
    """(agent columns, per-epoch activation counts)."""
    cols = agent_columns(events)
    rows = []
    for ev in events:
        counts = {c: 0 for c in cols}
        for agent, _ in ev.get("activations", []):
            counts[agent] += 1
        rows.append([counts[c] for c in cols])
    return cols, rows


def export_report(run_dir: str | Path, out_dir: str | Path | None = None) -> dict:
    """Summarize a finished run; identical logs produce identical reports."""
    run_dir = Path(run_dir)
    out_dir = Path(out_dir) if out_dir else run_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    events = read_jsonl(run_dir / "events.jsonl")
    kpis = read_jsonl(run_dir / "kpis.jsonl")
    recoveries = read_jsonl(run_dir / "recovery.jsonl")

    # Per-slice KPI means.
    slice_keys = sorted({k for row in kpis for k in row if k.startswith("s")})
    kpi_summary = {
        key: (sum(row.get(key, 0.0) for row in kpis) / len(kpis)) if kpis else 0.0
        for key in slice_keys
    }
    with (out_dir / "kpi_summary.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "mean"])
        for key in slice_keys:
            writer.writerow([key, f"{kpi_summary[key]:.6f}"])

    # Validation outcomes per intent type.
    validation: dict[str, dict[str, int]] = {}
    for ev in events:
        itype = ev.get("intent_type")
        if itype is None or ev.get("verdict_allowed") is None:
            continue
        bucket = validation.setdefault(itype, {"allowed": 0, "blocked": 0})
        bucket["allowed" if ev["verdict_allowed"] else "blocked"] += 1
    with (out_dir / "validation.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["intent_type", "allowed", "blocked"])
        for itype in sorted(validation):
            row = validation[itype]
            writer.writerow([itype, row["allowed"], row["blocked"]])

    # Recovery pass rates per KPI.
    recovery: dict[str, dict[str, int]] = {}
    for rec in recoveries:
        bucket = recovery.setdefault(rec["kpi"], {"pass": 0, "fail": 0, "unknown": 0})
        if rec["passed"] is None:
            bucket["unknown"] += 1
        else:
            bucket["pass" if rec["passed"] else "fail"] += 1
    with (out_dir / "recovery.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["kpi", "pass", "fail", "unknown", "pass_rate"])
        for kpi in sorted(recovery):
            row = recovery[kpi]
            judged = row["pass"] + row["fail"]
            rate = row["pass"] / judged if judged else 0.0
            writer.writerow([kpi, row["pass"], row["fail"], row["unknown"], f"{rate:.4f}"])

    # Activation heatmap: one row per epoch, one column per agent.
    cols, rows = activation_heatmap(events)
    with (out_dir / "heatmap.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch"] + cols)
        for ev, row in zip(events, rows):
            writer.writerow([ev["epoch"]] + row)

    return {
        "kpi_summary": kpi_summary,
        "validation": validation,
        "recovery": recovery,
        "heatmap_columns": cols,
        "heatmap": rows,
        "epochs": [ev["epoch"] for ev in events],
    }

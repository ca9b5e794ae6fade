/** End-to-end test against the real Python control surface.
 *
 * Spawns the service, round-trips intents to verdicts, injects degradations,
 * drives a 500-epoch run, and checks the client-rendered activation timeline
 * cell-for-cell against the offline report generator fed the same events.
 */

import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/client.js";
import { OperatorConsole } from "../src/console.js";
import { composeBoostIntent, composeKpiIntent } from "../src/compose.js";
import { buildTimeline } from "../src/timeline.js";

const PORT = 8340 + (process.pid % 1000);
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess;

async function waitForService(): Promise<void> {
  for (let i = 0; i < 100; i++) {
    try {
      const response = await fetch(`${BASE}/status`);
      if (response.ok) return;
    } catch {
      /* not up yet */
    }
    await new Promise((resolve) => setTimeout(resolve, 200));
  }
  throw new Error("service did not come up");
}

beforeAll(async () => {
  server = spawn(
    "python3",
    ["-c", "from ranorch.harness.cli import main; main()", "serve", "--seed", "3", "--port", String(PORT)],
    { stdio: "ignore" },
  );
  await waitForService();
}, 60_000);

afterAll(() => {
  server?.kill();
});

describe("operator console against the live service", () => {
  const client = new ApiClient(BASE);
  const console_ = new OperatorConsole(client, 2000);

  it(
    "round-trips intents to verdicts within one epoch and runs 500 epochs",
    async () => {
      await console_.advance(10); // warm-up so forecasts/KPIs exist

      const kpiOutcome = await console_.composeAndSubmit(
        composeKpiIntent({ metric: "throughput", direction: "increase", delta: 10, percent: true }),
      );
      expect(kpiOutcome.epochsWaited).toBe(1);
      expect(typeof kpiOutcome.verdictAllowed).toBe("boolean");
      expect(kpiOutcome.verdictReason).not.toBeNull();

      const boostOutcome = await console_.composeAndSubmit(
        composeBoostIntent({ slice: "urllc", rbgs: 2 }),
      );
      expect(boostOutcome.epochsWaited).toBe(1);
      expect(typeof boostOutcome.verdictAllowed).toBe("boolean");

      // Degradations scheduled ahead of the run, tracked client-side.
      const status = await client.status();
      const tracker = await console_.injectEvent({
        kind: "surge",
        magnitude: 2.0,
        at_step: status.step + 200,
        duration: 100,
        target_slice: 0,
      });
      await console_.injectEvent({
        kind: "perturb",
        magnitude: 1.5,
        at_step: status.step + 2000,
        duration: 100,
      });

      const intents = [
        composeKpiIntent({ metric: "delay", direction: "reduce", delta: 5, percent: true }),
        composeBoostIntent({ slice: "embb", rbgs: 3 }),
        composeKpiIntent({ metric: "energy", direction: "increase", delta: 10, percent: true }),
        composeKpiIntent({ metric: "loss", direction: "reduce", delta: 10, percent: true }),
      ];
      let next = 0;
      while ((await client.status()).epoch < 500) {
        if (next < intents.length) {
          await client.submitIntent(intents[next]!);
          next += 1;
        }
        const remaining = 500 - (await client.status()).epoch;
        await console_.advance(Math.min(50, remaining));
      }
      expect(console_.events).toHaveLength(500);
      expect(console_.gaps()).toEqual([]);

      const recovery = tracker.assess(await client.kpis(2000), "throughput");
      expect(recovery.phase).toBe("judged");
      expect(recovery.ratio).not.toBeNull();
    },
    180_000,
  );

  it(
    "client timeline matches the offline report heatmap cell-for-cell",
    async () => {
      const events = await client.events(2000);
      expect(events).toHaveLength(500);
      const clientTimeline = buildTimeline(events);

      const runDir = mkdtempSync(join(tmpdir(), "ranorch-console-"));
      try {
        writeFileSync(
          join(runDir, "events.jsonl"),
          events.map((event) => JSON.stringify(event)).join("\n") + "\n",
        );
        writeFileSync(join(runDir, "kpis.jsonl"), "");
        writeFileSync(join(runDir, "recovery.jsonl"), "");
        const script = [
          "import json, sys",
          "from ranorch.harness.report import export_report",
          "summary = export_report(sys.argv[1])",
          "print(json.dumps({'columns': summary['heatmap_columns'],",
          "                  'rows': summary['heatmap'],",
          "                  'epochs': summary['epochs']}))",
        ].join("\n");
        const proc = spawnSync("python3", ["-c", script, runDir], { encoding: "utf-8" });
        expect(proc.status).toBe(0);
        const report = JSON.parse(proc.stdout);
        expect(clientTimeline.columns).toEqual(report.columns);
        expect(clientTimeline.epochs).toEqual(report.epochs);
        expect(clientTimeline.rows).toEqual(report.rows);
      } finally {
        rmSync(runDir, { recursive: true, force: true });
      }

      // The live /timeline endpoint agrees with both renderings.
      const serverTimeline = await client.serverTimeline();
      expect(serverTimeline.columns).toEqual(clientTimeline.columns);
      expect(serverTimeline.rows).toEqual(clientTimeline.rows);
    },
    60_000,
  );
});

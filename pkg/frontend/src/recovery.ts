/** Client-side recovery tracking for injected degradation events.
 *
 * The pre-event baseline is the mean of the KPI over the epochs before the
 * event starts; the recovered level is the mean over the trailing window
 * after the event has been released. `latency` and `loss` improve downward,
 * so their ratio is inverted. Thresholds match the service's recovery gates.
 */

import type { KpiRow } from "./types.js";

export const RECOVERY_THRESHOLDS: Record<string, number> = {
  throughput: 0.9,
  energy_efficiency: 0.87,
  latency: 0.93,
};

const INVERTED = new Set(["latency", "loss"]);

export interface RecoveryStatus {
  kpi: string;
  phase: "waiting" | "degraded" | "recovering" | "judged";
  ratio: number | null;
  passed: boolean | null;
}

export interface TrackedEvent {
  eventId: number;
  atStep: number;
  duration: number;
}

function mean(values: number[]): number {
  return values.reduce((a, b) => a + b, 0) / values.length;
}

export class RecoveryTracker {
  constructor(
    readonly event: TrackedEvent,
    readonly window = 20,
  ) {}

  /** Judge one KPI column against the rows seen so far. */
  assess(rows: KpiRow[], kpi: string): RecoveryStatus {
    const column = `sys_${kpi}`;
    const releaseStep = this.event.atStep + this.event.duration;
    const pre = rows.filter((r) => r.step < this.event.atStep).map((r) => r[column] ?? 0);
    const post = rows.filter((r) => r.step >= releaseStep).map((r) => r[column] ?? 0);
    if (pre.length === 0) {
      return { kpi, phase: "waiting", ratio: null, passed: null };
    }
    if (post.length === 0) {
      const started = rows.some((r) => r.step >= this.event.atStep);
      return { kpi, phase: started ? "degraded" : "waiting", ratio: null, passed: null };
    }
    const baseline = mean(pre.slice(-this.window));
    const recovered = mean(post.slice(-this.window));
    if (baseline <= 0) {
      return { kpi, phase: "recovering", ratio: null, passed: null };
    }
    const ratio = INVERTED.has(kpi) ? baseline / Math.max(recovered, 1e-12) : recovered / baseline;
    if (post.length < this.window) {
      return { kpi, phase: "recovering", ratio, passed: null };
    }
    const threshold = RECOVERY_THRESHOLDS[kpi] ?? 0.9;
    return { kpi, phase: "judged", ratio, passed: ratio >= threshold };
  }
}

/** Intent composition helpers mirroring the service's intent grammar:
 *
 *   <verb> <kpi> [by <delta>[%]] [in slice <name>]
 *   <verb> slice <name> by <count> rbg[s]
 */

export const KPI_METRICS = ["throughput", "delay", "loss", "energy"] as const;
export const SLICE_NAMES = ["embb", "urllc", "be"] as const;

export type KpiMetric = (typeof KPI_METRICS)[number];
export type SliceName = (typeof SLICE_NAMES)[number];

// Verbs the grammar accepts, keyed by direction.
const INCREASE = "increase";
const REDUCE = "reduce";

export interface KpiIntentSpec {
  metric: KpiMetric;
  direction: "increase" | "reduce";
  delta?: number;
  percent?: boolean;
  slice?: SliceName;
}

export interface BoostIntentSpec {
  slice: SliceName;
  rbgs: number;
}

export function composeKpiIntent(spec: KpiIntentSpec): string {
  if (spec.delta !== undefined && !(spec.delta > 0)) {
    throw new Error("delta must be positive; use direction to pick the sign");
  }
  const parts = [spec.direction === "increase" ? INCREASE : REDUCE, spec.metric];
  if (spec.delta !== undefined) {
    parts.push("by", `${spec.delta}${spec.percent ? "%" : ""}`);
  }
  if (spec.slice !== undefined) {
    parts.push("in", "slice", spec.slice);
  }
  return parts.join(" ");
}

export function composeBoostIntent(spec: BoostIntentSpec): string {
  if (!Number.isInteger(spec.rbgs) || spec.rbgs < 1) {
    throw new Error("rbgs must be a positive integer");
  }
  return `boost slice ${spec.slice} by ${spec.rbgs} rbg${spec.rbgs === 1 ? "" : "s"}`;
}

import type { EpochEvent } from "../src/types.js";

export function makeEvent(
  epoch: number,
  activations: [string, string][],
  overrides: Partial<EpochEvent> = {},
): EpochEvent {
  return {
    epoch,
    step_start: (epoch - 1) * 20 + 1,
    step_end: epoch * 20,
    mode: "idle",
    intent_text: null,
    intent_type: null,
    intent_origin: null,
    verdict_allowed: null,
    verdict_reason: null,
    goal_metric: null,
    goal_delta: null,
    goal_fulfillment: null,
    activations,
    trace: ["super", "rag", "super"],
    trace_ok: true,
    drift: false,
    reward: 0,
    system: { throughput: 1000, latency: 2, loss: 0.01, energy_efficiency: 10 },
    per_slice: {},
    ...overrides,
  };
}

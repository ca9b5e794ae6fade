/** Wire types for the control surface; shapes mirror the JSON the service emits. */

export interface EpochEvent {
  epoch: number;
  step_start: number;
  step_end: number;
  mode: "idle" | "intent" | "selfheal";
  intent_text: string | null;
  intent_type: string | null;
  intent_origin: string | null;
  verdict_allowed: boolean | null;
  verdict_reason: string | null;
  goal_metric: string | null;
  goal_delta: number | null;
  goal_fulfillment: number | null;
  activations: [string, string][];
  trace: string[];
  trace_ok: boolean;
  drift: boolean;
  reward: number;
  system: Record<string, number>;
  per_slice: Record<string, Record<string, number>>;
}

export interface KpiRow {
  epoch: number;
  step: number;
  [column: string]: number;
}

export interface StatusResponse {
  epoch: number;
  step: number;
  paused: boolean;
  queued_intents: number;
  events: number;
}

export interface IntentReceipt {
  queued: boolean;
  intent_type: string;
  position_in_queue: number;
}

export interface InjectReceipt {
  event_id: number;
  kind: string;
  at_step: number;
  duration: number;
}

export interface Timeline {
  columns: string[];
  rows: number[][];
  epochs: number[];
}

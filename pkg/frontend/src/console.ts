/** Operator console session: compose/submit intents, inject degradations,
 * and keep a bounded local view of the epoch stream with gap and staleness
 * detection. All interaction goes through the HTTP client.
 */

import { ApiClient, InjectParams } from "./client.js";
import { RecoveryTracker } from "./recovery.js";
import { findEpochGaps, StalenessTracker, EpochGap } from "./staleness.js";
import { buildTimeline, DEFAULT_WINDOW } from "./timeline.js";
import type { EpochEvent, Timeline } from "./types.js";

export interface SubmissionOutcome {
  intentType: string;
  epoch: number;
  epochsWaited: number;
  verdictAllowed: boolean;
  verdictReason: string | null;
  event: EpochEvent;
}

export class OperatorConsole {
  readonly events: EpochEvent[] = [];
  readonly trackers: RecoveryTracker[] = [];
  readonly staleness: StalenessTracker;

  constructor(
    readonly client: ApiClient,
    readonly windowLimit = DEFAULT_WINDOW,
    stalenessBudgetMs = 30_000,
  ) {
    this.staleness = new StalenessTracker(stalenessBudgetMs);
  }

  private absorb(events: EpochEvent[], nowMs?: number): void {
    this.events.push(...events);
    if (this.events.length > this.windowLimit) {
      this.events.splice(0, this.events.length - this.windowLimit);
    }
    const last = this.events[this.events.length - 1];
    if (last !== undefined) {
      this.staleness.observe(last.epoch, nowMs);
    }
  }

  async advance(epochs: number, nowMs?: number): Promise<EpochEvent[]> {
    const events = await this.client.advance(epochs);
    this.absorb(events, nowMs);
    return events;
  }

  /** Submit an intent and advance until its verdict lands (bounded wait). */
  async composeAndSubmit(text: string, maxEpochs = 5): Promise<SubmissionOutcome> {
    const receipt = await this.client.submitIntent(text);
    for (let waited = 1; waited <= maxEpochs; waited++) {
      const [event] = await this.advance(1);
      if (event !== undefined && event.intent_text === text) {
        if (event.verdict_allowed === null) {
          throw new Error(`epoch ${event.epoch} consumed the intent without a verdict`);
        }
        return {
          intentType: receipt.intent_type,
          epoch: event.epoch,
          epochsWaited: waited,
          verdictAllowed: event.verdict_allowed,
          verdictReason: event.verdict_reason,
          event,
        };
      }
    }
    throw new Error(`intent not consumed within ${maxEpochs} epochs`);
  }

  /** Schedule a degradation and start tracking its recovery. */
  async injectEvent(params: InjectParams, recoveryWindow = 20): Promise<RecoveryTracker> {
    const receipt = await this.client.inject(params);
    const tracker = new RecoveryTracker(
      { eventId: receipt.event_id, atStep: receipt.at_step, duration: receipt.duration },
      recoveryWindow,
    );
    this.trackers.push(tracker);
    return tracker;
  }

  timeline(): Timeline {
    return buildTimeline(this.events, this.windowLimit);
  }

  gaps(): EpochGap[] {
    return findEpochGaps(this.events.map((event) => event.epoch));
  }

  isStale(nowMs?: number): boolean {
    return this.staleness.isStale(nowMs);
  }
}

/** Gap and staleness detection over the epoch stream.
 *
 * Gaps are missing epoch indices (the loop is strictly sequential, so any
 * hole means the console lost records); staleness means the feed stopped
 * producing new epochs for longer than the configured budget.
 */

export interface EpochGap {
  afterEpoch: number;
  missing: number; // count of absent epochs
}

export function findEpochGaps(epochs: number[]): EpochGap[] {
  const gaps: EpochGap[] = [];
  for (let i = 1; i < epochs.length; i++) {
    const prev = epochs[i - 1]!;
    const next = epochs[i]!;
    if (next > prev + 1) {
      gaps.push({ afterEpoch: prev, missing: next - prev - 1 });
    }
  }
  return gaps;
}

export class StalenessTracker {
  private lastEpoch = -1;
  private lastChangeMs: number;

  constructor(
    readonly maxAgeMs: number,
    nowMs: number = Date.now(),
  ) {
    this.lastChangeMs = nowMs;
  }

  /** Feed the latest observed epoch; returns true if it advanced. */
  observe(epoch: number, nowMs: number = Date.now()): boolean {
    if (epoch > this.lastEpoch) {
      this.lastEpoch = epoch;
      this.lastChangeMs = nowMs;
      return true;
    }
    return false;
  }

  ageMs(nowMs: number = Date.now()): number {
    return nowMs - this.lastChangeMs;
  }

  isStale(nowMs: number = Date.now()): boolean {
    return this.ageMs(nowMs) > this.maxAgeMs;
  }
}

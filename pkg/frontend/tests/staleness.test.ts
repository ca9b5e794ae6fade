import { describe, expect, it } from "vitest";

import { findEpochGaps, StalenessTracker } from "../src/staleness.js";

describe("findEpochGaps", () => {
  it("reports each hole with its size", () => {
    expect(findEpochGaps([1, 2, 3, 6, 7, 10])).toEqual([
      { afterEpoch: 3, missing: 2 },
      { afterEpoch: 7, missing: 2 },
    ]);
  });

  it("is empty for contiguous or trivial streams", () => {
    expect(findEpochGaps([])).toEqual([]);
    expect(findEpochGaps([5])).toEqual([]);
    expect(findEpochGaps([1, 2, 3])).toEqual([]);
  });
});

describe("StalenessTracker", () => {
  it("goes stale only after the budget with no new epochs", () => {
    const tracker = new StalenessTracker(1000, 0);
    expect(tracker.observe(1, 100)).toBe(true);
    expect(tracker.isStale(1000)).toBe(false);
    expect(tracker.isStale(1101)).toBe(true);
  });

  it("repeated observations of the same epoch do not refresh", () => {
    const tracker = new StalenessTracker(1000, 0);
    tracker.observe(3, 100);
    expect(tracker.observe(3, 900)).toBe(false);
    expect(tracker.isStale(1200)).toBe(true);
    expect(tracker.observe(4, 1300)).toBe(true);
    expect(tracker.isStale(1400)).toBe(false);
  });
});

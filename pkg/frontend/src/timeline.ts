/** Activation timeline built client-side from the raw event stream.
 *
 * Columns are the sorted set of agent ids seen in the window; each row is the
 * per-epoch activation count per agent. The window keeps the most recent
 * `limit` epochs (default 2000) so long sessions stay bounded.
 */

import type { EpochEvent, Timeline } from "./types.js";

export const DEFAULT_WINDOW = 2000;

export function buildTimeline(events: EpochEvent[], limit = DEFAULT_WINDOW): Timeline {
  const window = limit >= 0 ? events.slice(-limit) : events.slice();
  const agents = new Set<string>();
  for (const event of window) {
    for (const [agent] of event.activations) {
      agents.add(agent);
    }
  }
  const columns = [...agents].sort();
  const index = new Map(columns.map((c, i) => [c, i]));
  const rows = window.map((event) => {
    const counts = new Array<number>(columns.length).fill(0);
    for (const [agent] of event.activations) {
      const i = index.get(agent)!;
      counts[i] = (counts[i] ?? 0) + 1;
    }
    return counts;
  });
  return { columns, rows, epochs: window.map((event) => event.epoch) };
}

/** Fixed-width text heatmap; counts above 9 render as '+'. */
export function renderTimeline(timeline: Timeline): string {
  const lines = [`epoch | ${timeline.columns.join(" ")}`];
  timeline.rows.forEach((row, i) => {
    const cells = row
      .map((count, j) => String(count > 9 ? "+" : count).padStart(timeline.columns[j]!.length))
      .join(" ");
    lines.push(`${String(timeline.epochs[i]).padStart(5)} | ${cells}`);
  });
  return lines.join("\n");
}

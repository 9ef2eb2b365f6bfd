/** Categorical palette and the single-hue sequential ramp for expression. */

const PALETTE = [
  "#4e79a7",
  "#f28e2b",
  "#e15759",
  "#76b7b2",
  "#59a14f",
  "#edc948",
  "#b07aa1",
  "#ff9da7",
  "#9c755f",
  "#bab0ac",
  "#1b9e77",
  "#d95f02",
  "#7570b3",
  "#e7298a",
  "#66a61e",
  "#e6ab02",
];

export function categoricalColor(index: number): string {
  return PALETTE[((index % PALETTE.length) + PALETTE.length) % PALETTE.length];
}

/** Map a label list to stable colors by sorted order. */
export function labelColors(labels: string[]): Map<string, string> {
  const sorted = [...new Set(labels)].sort();
  return new Map(sorted.map((l, i) => [l, categoricalColor(i)]));
}

/** Min-max normalize over the visible values; degenerate ranges map to 0.5. */
export function normalize(values: number[]): (v: number) => number {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (!(hi > lo)) return () => 0.5;
  return (v) => (v - lo) / (hi - lo);
}

/** Single-hue blue ramp: light (low) to saturated (high). */
export function sequentialColor(t: number): string {
  const clamped = Math.max(0, Math.min(1, t));
  const light = 92 - clamped * 60; // 92% -> 32%
  return `hsl(215, 75%, ${light.toFixed(1)}%)`;
}

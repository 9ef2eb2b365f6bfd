import { categoricalColor, labelColors, sequentialColor } from "./colors.js";
import type { SummariesResponse } from "./types.js";

/** Canvas renderers for the third component. All tolerate a missing 2-D
 * context (headless tests) by simply skipping the draw. */

function context(canvas: HTMLCanvasElement): CanvasRenderingContext2D | null {
  return canvas.getContext ? canvas.getContext("2d") : null;
}

/** Heatmap of the top differential features; per-feature (row) min-max
 * normalization happens here on the client, the server sends raw medians. */
export function drawHeatmap(canvas: HTMLCanvasElement, body: SummariesResponse): void {
  const ctx = context(canvas);
  if (!ctx) return;
  const rows = body.heatmap;
  const clusters = body.clusters.map(String);
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  if (rows.length === 0 || clusters.length === 0) return;

  const labelW = 130;
  const headerH = 22;
  const cellW = (canvas.width - labelW) / clusters.length;
  const cellH = Math.min(26, (canvas.height - headerH) / rows.length);

  ctx.font = "12px sans-serif";
  ctx.fillStyle = "#333";
  clusters.forEach((c, j) => {
    ctx.fillText(`cluster ${c}`, labelW + j * cellW + 4, 14);
  });
  rows.forEach((row, i) => {
    const values = clusters.map((c) => row.medians[c] ?? 0);
    const lo = Math.min(...values);
    const hi = Math.max(...values);
    values.forEach((v, j) => {
      const t = hi > lo ? (v - lo) / (hi - lo) : 0.5;
      ctx.fillStyle = sequentialColor(t);
      ctx.fillRect(labelW + j * cellW, headerH + i * cellH, cellW - 2, cellH - 2);
    });
    ctx.fillStyle = "#333";
    ctx.fillText(row.feature.slice(0, 18), 4, headerH + i * cellH + cellH / 2 + 4);
  });
}

/** Structure plot: one stacked bar of cell-type fractions per cluster. */
export function drawStructure(canvas: HTMLCanvasElement, body: SummariesResponse): void {
  const ctx = context(canvas);
  if (!ctx) return;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const clusters = Object.keys(body.structure).sort((a, b) => Number(a) - Number(b));
  if (clusters.length === 0) return;
  const types = [...new Set(clusters.flatMap((c) => Object.keys(body.structure[c])))].sort();
  const colors = labelColors(types);
  const barW = Math.min(70, (canvas.width - 40) / clusters.length);
  const plotH = canvas.height - 40;

  ctx.font = "12px sans-serif";
  clusters.forEach((c, i) => {
    let y = 10;
    for (const t of types) {
      const frac = body.structure[c][t] ?? 0;
      const h = frac * plotH;
      ctx.fillStyle = colors.get(t) ?? "#999";
      ctx.fillRect(20 + i * (barW + 8), y, barW, h);
      y += h;
    }
    ctx.fillStyle = "#333";
    ctx.fillText(String(c), 20 + i * (barW + 8) + barW / 2 - 4, canvas.height - 12);
  });
}

/** Grouped histogram of the selected feature across clusters (shared bins). */
export function drawHistogram(canvas: HTMLCanvasElement, body: SummariesResponse): void {
  const ctx = context(canvas);
  if (!ctx) return;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const hist = body.histogram;
  if (!hist) return;
  const clusters = Object.keys(hist.counts).sort((a, b) => Number(a) - Number(b));
  const bins = hist.edges.length - 1;
  const maxCount = Math.max(1, ...clusters.flatMap((c) => hist.counts[c]));
  const plotH = canvas.height - 30;
  const groupW = (canvas.width - 20) / bins;
  const barW = groupW / Math.max(1, clusters.length);

  clusters.forEach((c, ci) => {
    ctx.fillStyle = categoricalColor(Number(c) - 1);
    ctx.globalAlpha = 0.8;
    hist.counts[c].forEach((count, b) => {
      const h = (count / maxCount) * plotH;
      ctx.fillRect(10 + b * groupW + ci * barW, 10 + plotH - h, Math.max(1, barW - 1), h);
    });
  });
  ctx.globalAlpha = 1.0;
  ctx.fillStyle = "#333";
  ctx.font = "12px sans-serif";
  ctx.fillText(hist.feature, 10, canvas.height - 8);
}

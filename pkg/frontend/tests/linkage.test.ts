/**
 * End-to-end linked-view test against a LIVE service on simulation artifacts:
 * the real pipeline (simulate -> embed -> cluster) runs in a temp directory,
 * `serve` exposes it over HTTP, and the real UI modules are driven through
 * DOM events in happy-dom. Canvas rasterization is not exercised (no real
 * browser here); the assertions target id sets, legend DOM, and the
 * recluster round-trip.
 */
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { connect } from "node:net";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { ApiClient } from "../src/api.js";
import { createApp, type App } from "../src/app.js";
import type { CellPoint } from "../src/types.js";

const PY = "python3";
const PORT = 8612 + (process.pid % 150);
const BASE = `http://127.0.0.1:${PORT}`;

let serverProc: ChildProcess | null = null;
let artifactDir = "";
let app: App;
let points: CellPoint[] = [];

function runStage(args: string[]): void {
  const res = spawnSync(PY, ["-m", "microenv.cli", ...args], {
    encoding: "utf-8",
    timeout: 240_000,
  });
  if (res.status !== 0) {
    throw new Error(`stage ${args[0]} failed: ${res.stderr}\n${res.stdout}`);
  }
}

function portOpen(port: number): Promise<boolean> {
  return new Promise((resolve) => {
    const sock = connect({ port, host: "127.0.0.1" }, () => {
      sock.destroy();
      resolve(true);
    });
    sock.on("error", () => resolve(false));
    sock.setTimeout(500, () => {
      sock.destroy();
      resolve(false);
    });
  });
}

async function waitForServer(deadlineMs: number): Promise<void> {
  const start = Date.now();
  while (Date.now() - start < deadlineMs) {
    if (await portOpen(PORT)) {
      const resp = await fetch(`${BASE}/meta`);
      if (resp.ok) return;
    }
    await new Promise((r) => setTimeout(r, 300));
  }
  throw new Error("service did not come up");
}

beforeAll(async () => {
  artifactDir = mkdtempSync(join(tmpdir(), "microenv-ui-"));
  runStage(["simulate", "--out", artifactDir, "--seed", "0"]);
  runStage(["embed", "--out", artifactDir, "--set", "embedding.epochs=200"]);
  runStage(["cluster", "--out", artifactDir, "--k", "5"]);
  serverProc = spawn(
    PY,
    ["-m", "microenv.cli", "serve", "--artifacts", artifactDir, "--port", String(PORT), "--set", "cluster.k=5"],
    { stdio: "ignore" },
  );
  await waitForServer(90_000);

  document.body.innerHTML = '<div id="app"></div>';
  app = await createApp(document.getElementById("app")!, new ApiClient(BASE));
  points = app.points;
  expect(points.length).toBe(2000);
}, 420_000);

afterAll(() => {
  serverProc?.kill("SIGTERM");
  if (artifactDir) rmSync(artifactDir, { recursive: true, force: true });
});

function mouse(type: string, x: number, y: number): MouseEvent {
  return new MouseEvent(type, { clientX: x, clientY: y, bubbles: true });
}

describe("linked views against the live service", () => {
  it("brush in the embedding panel highlights the identical id set in the spatial panel", async () => {
    // choose a data rectangle that surely contains points: around the median
    const xs = points.map((p) => p.embedding_x).sort((a, b) => a - b);
    const ys = points.map((p) => p.embedding_y).sort((a, b) => a - b);
    const rect = {
      x0: xs[Math.floor(xs.length * 0.2)],
      x1: xs[Math.floor(xs.length * 0.6)],
      y0: ys[Math.floor(ys.length * 0.2)],
      y1: ys[Math.floor(ys.length * 0.6)],
    };
    const [sx0, sy0] = app.embedding.dataToScreen(rect.x0, rect.y0);
    const [sx1, sy1] = app.embedding.dataToScreen(rect.x1, rect.y1);

    app.embedding.canvas.dispatchEvent(mouse("mousedown", sx0, sy0));
    app.embedding.canvas.dispatchEvent(mouse("mousemove", (sx0 + sx1) / 2, (sy0 + sy1) / 2));
    app.embedding.canvas.dispatchEvent(mouse("mouseup", sx1, sy1));

    const inEmbedding = app.highlightedIds("embedding");
    const inSpatial = app.highlightedIds("spatial");
    expect(inEmbedding.size).toBeGreaterThan(0);
    expect([...inEmbedding].sort()).toEqual([...inSpatial].sort());

    // set equality with a brute-force recomputation from the payload
    const expected = new Set(
      points
        .filter(
          (p) =>
            p.embedding_x >= Math.min(rect.x0, rect.x1) &&
            p.embedding_x <= Math.max(rect.x0, rect.x1) &&
            p.embedding_y >= Math.min(rect.y0, rect.y1) &&
            p.embedding_y <= Math.max(rect.y0, rect.y1),
        )
        .map((p) => p.id),
    );
    expect([...inEmbedding].sort()).toEqual([...expected].sort());
  });

  it("legend toggle removes the cell type from both panels and restores it", () => {
    const type = points[0].cell_type;
    const entry = document.querySelector(
      `#legend-embedding .legend-entry[data-label="${type}"]`,
    ) as HTMLElement;
    expect(entry).toBeTruthy();
    entry.click();

    for (const panel of ["embedding", "spatial"] as const) {
      const visible = app.visibleIdsIn(panel);
      const typesVisible = new Set(
        points.filter((p) => visible.has(p.id)).map((p) => p.cell_type),
      );
      expect(typesVisible.has(type)).toBe(false);
      expect(visible.size).toBeGreaterThan(0);
    }

    // involution via the (re-rendered) legend entry
    const entryAgain = document.querySelector(
      `#legend-embedding .legend-entry[data-label="${type}"]`,
    ) as HTMLElement;
    entryAgain.click();
    const visible = app.visibleIdsIn("embedding");
    expect(visible.size).toBe(points.length);
  });

  it("k-slider change round-trips through POST /recluster and updates both legends to k entries", async () => {
    // color by cluster so legends enumerate cluster labels
    const radio = document.querySelector(
      'input[name="color-mode"][value="cluster"]',
    ) as HTMLInputElement;
    radio.checked = true;
    radio.dispatchEvent(new Event("change", { bubbles: true }));

    const before = await new ApiClient(BASE).meta();
    const slider = document.getElementById("k-slider") as HTMLInputElement;
    slider.value = "7";
    slider.dispatchEvent(new Event("input", { bubbles: true }));

    const deadline = Date.now() + 60_000;
    while (app.state.k !== 7 && Date.now() < deadline) {
      await new Promise((r) => setTimeout(r, 200));
    }
    expect(app.state.k).toBe(7);

    const after = await new ApiClient(BASE).meta();
    expect(after.k).toBe(7);
    expect(after.version).toBeGreaterThan(before.version);

    expect(app.legendLabels("embedding")).toHaveLength(7);
    expect(app.legendLabels("spatial")).toHaveLength(7);
    expect(app.legendLabels("embedding")).toEqual(app.legendLabels("spatial"));
  });

  it("brush persists across reclustering (ids are stable)", async () => {
    app.brush("spatial", {
      x0: Math.min(...points.map((p) => p.spatial_x)),
      y0: Math.min(...points.map((p) => p.spatial_y)),
      x1: 0,
      y1: 0,
    });
    const before = app.highlightedIds("embedding");
    await app.setK(6);
    const after = app.highlightedIds("embedding");
    expect([...after].sort()).toEqual([...before].sort());
  });

  it("rapid slider moves coalesce to the final k", async () => {
    const p1 = app.setK(4);
    const p2 = app.setK(9);
    await Promise.all([p1, p2]);
    const deadline = Date.now() + 30_000;
    while (app.state.k !== 9 && Date.now() < deadline) {
      await new Promise((r) => setTimeout(r, 100));
    }
    expect(app.state.k).toBe(9);
    const meta = await new ApiClient(BASE).meta();
    expect(meta.k).toBe(9);
  });
});

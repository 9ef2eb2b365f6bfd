import { describe, expect, it } from "vitest";

import {
  applyClusters,
  brushSelect,
  initialState,
  legendEntries,
  setColorMode,
  toggleCellType,
  visibleIds,
} from "../src/state.js";
import type { CellPoint } from "../src/types.js";

function makePoints(): CellPoint[] {
  // a 2x2 data-space grid in both coordinate systems, types checkerboarded
  const rows: CellPoint[] = [];
  let i = 0;
  for (const x of [0, 10]) {
    for (const y of [0, 10]) {
      rows.push({
        id: `c${i}`,
        spatial_x: x,
        spatial_y: y,
        embedding_x: -x, // embedding space is deliberately different
        embedding_y: -y,
        cell_type: i % 2 === 0 ? "immune" : "tumor",
        cluster: 1 + (i % 3),
      });
      i += 1;
    }
  }
  return rows;
}

describe("brush selection", () => {
  it("selects visible points inside the rect of the originating panel", () => {
    const points = makePoints();
    let state = initialState(points, 3);
    state = brushSelect(state, points, "spatial", { x0: -1, y0: -1, x1: 5, y1: 11 });
    expect([...state.selection].sort()).toEqual(["c0", "c1"]);
    expect(state.selectionOrigin).toBe("spatial");
  });

  it("uses embedding coordinates when brushed in the embedding panel", () => {
    const points = makePoints();
    let state = initialState(points, 3);
    state = brushSelect(state, points, "embedding", { x0: -11, y0: -11, x1: -9, y1: 1 });
    // embedding coords are negated spatial: x=-10 selects spatial x=10
    expect([...state.selection].sort()).toEqual(["c2", "c3"]);
  });

  it("empty rect clears the selection in both panels", () => {
    const points = makePoints();
    let state = initialState(points, 3);
    state = brushSelect(state, points, "spatial", { x0: -1, y0: -1, x1: 11, y1: 11 });
    expect(state.selection.size).toBe(4);
    state = brushSelect(state, points, "spatial", { x0: 99, y0: 99, x1: 100, y1: 100 });
    expect(state.selection.size).toBe(0);
    expect(state.selectionOrigin).toBeNull();
  });

  it("never selects hidden cells", () => {
    const points = makePoints();
    let state = initialState(points, 3);
    state = toggleCellType(state, points, "immune");
    state = brushSelect(state, points, "spatial", { x0: -1, y0: -1, x1: 11, y1: 11 });
    for (const id of state.selection) {
      const p = points.find((q) => q.id === id)!;
      expect(p.cell_type).toBe("tumor");
    }
  });
});

describe("legend toggling", () => {
  it("hides the type everywhere and prunes the selection", () => {
    const points = makePoints();
    let state = initialState(points, 3);
    state = brushSelect(state, points, "spatial", { x0: -1, y0: -1, x1: 11, y1: 11 });
    state = toggleCellType(state, points, "immune");
    const vis = visibleIds(state, points);
    expect([...vis].every((id) => points.find((p) => p.id === id)!.cell_type === "tumor")).toBe(true);
    expect([...state.selection].every((id) => vis.has(id))).toBe(true);
  });

  it("toggle twice restores visibility (involution)", () => {
    const points = makePoints();
    let state = initialState(points, 3);
    const before = visibleIds(state, points);
    state = toggleCellType(state, points, "tumor");
    state = toggleCellType(state, points, "tumor");
    expect([...visibleIds(state, points)].sort()).toEqual([...before].sort());
  });

  it("hiding all types empties both panels", () => {
    const points = makePoints();
    let state = initialState(points, 3);
    state = toggleCellType(state, points, "immune");
    state = toggleCellType(state, points, "tumor");
    expect(visibleIds(state, points).size).toBe(0);
  });
});

describe("reclustering", () => {
  it("applies assignments by point order and keeps the brush", () => {
    const points = makePoints();
    let state = initialState(points, 3);
    state = brushSelect(state, points, "spatial", { x0: -1, y0: -1, x1: 5, y1: 11 });
    const before = new Set(state.selection);
    state = applyClusters(state, points, 2, [2, 1, 2, 1]);
    expect(state.k).toBe(2);
    expect(state.clusters.get("c0")).toBe(2);
    expect([...state.selection].sort()).toEqual([...before].sort());
  });

  it("cluster legend has k entries after recluster", () => {
    const points = makePoints();
    let state = initialState(points, 3);
    state = setColorMode(state, "cluster");
    state = applyClusters(state, points, 2, [2, 1, 2, 1]);
    expect(legendEntries(state, points)).toEqual(["1", "2"]);
  });

  it("color mode change does not change positions (state holds no coords)", () => {
    const points = makePoints();
    let state = initialState(points, 3);
    const snapshot = JSON.stringify(points);
    state = setColorMode(state, "cluster");
    state = setColorMode(state, "expression");
    expect(JSON.stringify(points)).toBe(snapshot);
    expect(state.colorMode).toBe("expression");
  });
});

import type { CellPoint, ColorMode, PanelKind, Rect, Tab } from "./types.js";

/**
 * All interaction state lives here, and the invariants hold by construction:
 * one brush-selection set is shared by both panels (so their highlighted id
 * sets are always identical), hidden cell types are filtered out of both
 * panels and pruned from the selection, and summary requests always carry the
 * current checkbox sets.
 */
export interface ViewState {
  hiddenTypes: Set<string>;
  selection: Set<string>;
  selectionOrigin: PanelKind | null;
  k: number;
  colorMode: ColorMode;
  activeTab: Tab;
  checkedTypes: Set<string>;
  checkedClusters: Set<number>;
  selectedFeature: string | null;
  clusters: Map<string, number>; // cell id -> cluster label
}

export function initialState(points: CellPoint[], k: number): ViewState {
  const types = new Set(points.map((p) => p.cell_type));
  const clusters = new Map(points.map((p) => [p.id, p.cluster] as const));
  return {
    hiddenTypes: new Set(),
    selection: new Set(),
    selectionOrigin: null,
    k,
    colorMode: "cell_type",
    activeTab: "heatmap",
    checkedTypes: types,
    checkedClusters: new Set(points.map((p) => p.cluster)),
    selectedFeature: null,
    clusters,
  };
}

export function isVisible(state: ViewState, p: CellPoint): boolean {
  return !state.hiddenTypes.has(p.cell_type);
}

export function visibleIds(state: ViewState, points: CellPoint[]): Set<string> {
  return new Set(points.filter((p) => isVisible(state, p)).map((p) => p.id));
}

function panelCoords(p: CellPoint, panel: PanelKind): [number, number] {
  return panel === "embedding"
    ? [p.embedding_x, p.embedding_y]
    : [p.spatial_x, p.spatial_y];
}

function inRect(x: number, y: number, r: Rect): boolean {
  const [xlo, xhi] = r.x0 <= r.x1 ? [r.x0, r.x1] : [r.x1, r.x0];
  const [ylo, yhi] = r.y0 <= r.y1 ? [r.y0, r.y1] : [r.y1, r.y0];
  return x >= xlo && x <= xhi && y >= ylo && y <= yhi;
}

/** Replace the selection with the visible points inside `rect` (data space
 * of the originating panel); an empty rect clears it in both panels. */
export function brushSelect(
  state: ViewState,
  points: CellPoint[],
  panel: PanelKind,
  rect: Rect,
): ViewState {
  const selection = new Set<string>();
  for (const p of points) {
    if (!isVisible(state, p)) continue;
    const [x, y] = panelCoords(p, panel);
    if (inRect(x, y, rect)) selection.add(p.id);
  }
  return {
    ...state,
    selection,
    selectionOrigin: selection.size > 0 ? panel : null,
  };
}

export function clearSelection(state: ViewState): ViewState {
  return { ...state, selection: new Set(), selectionOrigin: null };
}

/** Flip a cell type's visibility in BOTH panels; hidden cells leave the selection. */
export function toggleCellType(
  state: ViewState,
  points: CellPoint[],
  type: string,
): ViewState {
  const hiddenTypes = new Set(state.hiddenTypes);
  if (hiddenTypes.has(type)) {
    hiddenTypes.delete(type);
  } else {
    hiddenTypes.add(type);
  }
  const byId = new Map(points.map((p) => [p.id, p] as const));
  const selection = new Set(
    [...state.selection].filter((id) => {
      const p = byId.get(id);
      return p !== undefined && !hiddenTypes.has(p.cell_type);
    }),
  );
  return { ...state, hiddenTypes, selection };
}

/** Apply a recluster response; the brush persists (ids are stable). */
export function applyClusters(
  state: ViewState,
  points: CellPoint[],
  k: number,
  assignments: number[],
): ViewState {
  const clusters = new Map<string, number>();
  points.forEach((p, i) => clusters.set(p.id, assignments[i]));
  return {
    ...state,
    k,
    clusters,
    checkedClusters: new Set(assignments),
  };
}

export function setColorMode(state: ViewState, mode: ColorMode): ViewState {
  return { ...state, colorMode: mode };
}

export function setTab(state: ViewState, tab: Tab): ViewState {
  return { ...state, activeTab: tab };
}

export function setFeature(state: ViewState, feature: string | null): ViewState {
  return { ...state, selectedFeature: feature };
}

export function toggleCheckedType(state: ViewState, type: string): ViewState {
  const checkedTypes = new Set(state.checkedTypes);
  if (checkedTypes.has(type)) checkedTypes.delete(type);
  else checkedTypes.add(type);
  return { ...state, checkedTypes };
}

export function toggleCheckedCluster(state: ViewState, cluster: number): ViewState {
  const checkedClusters = new Set(state.checkedClusters);
  if (checkedClusters.has(cluster)) checkedClusters.delete(cluster);
  else checkedClusters.add(cluster);
  return { ...state, checkedClusters };
}

/** Legend entries for the current color mode, in stable display order. */
export function legendEntries(state: ViewState, points: CellPoint[]): string[] {
  if (state.colorMode === "cluster") {
    const labels = new Set<number>();
    for (const p of points) {
      const c = state.clusters.get(p.id);
      if (c !== undefined) labels.add(c);
    }
    return [...labels].sort((a, b) => a - b).map(String);
  }
  if (state.colorMode === "cell_type") {
    return [...new Set(points.map((p) => p.cell_type))].sort();
  }
  return [];
}

/** Wire types for the session API. */

export interface CellPoint {
  id: string;
  spatial_x: number;
  spatial_y: number;
  embedding_x: number;
  embedding_y: number;
  cell_type: string;
  cluster: number;
}

export interface Meta {
  version: number;
  n: number;
  k: number;
  feature_names: string[];
  cell_types: string[];
  seed: number;
}

export interface PointsResponse {
  version: number;
  points: CellPoint[];
}

export interface ReclusterResponse {
  version: number;
  k: number;
  assignments: number[];
  sizes: number[];
}

export interface ExpressionResponse {
  version: number;
  feature: string;
  values: number[];
}

export interface HeatmapRow {
  feature: string;
  spread: number;
  medians: Record<string, number>;
}

export interface SummariesResponse {
  version: number;
  clusters: number[];
  cell_types: string[];
  heatmap: HeatmapRow[];
  structure: Record<string, Record<string, number>>;
  histogram: {
    feature: string;
    edges: number[];
    counts: Record<string, number[]>;
  } | null;
}

export interface ApiErrorBody {
  error: { code: string; message: string; [key: string]: unknown };
}

export type PanelKind = "embedding" | "spatial";
export type ColorMode = "cell_type" | "cluster" | "expression";
export type Tab = "heatmap" | "structure" | "histogram";

export interface Rect {
  x0: number;
  y0: number;
  x1: number;
  y1: number;
}

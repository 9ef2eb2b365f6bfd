import type { CellPoint, PanelKind, Rect } from "./types.js";

export interface PanelPoint {
  id: string;
  x: number;
  y: number;
  color: string;
  visible: boolean;
  highlighted: boolean;
}

/**
 * Canvas scatterplot for one panel. Thousands of points rule out per-point
 * DOM nodes; everything draws into a single canvas, and the brush is tracked
 * in screen space then mapped back to data space for the controller.
 */
export class ScatterPanel {
  readonly canvas: HTMLCanvasElement;
  private ctx: CanvasRenderingContext2D | null;
  private pointsCache: PanelPoint[] = [];
  private bounds = { xlo: 0, xhi: 1, ylo: 0, yhi: 1 };
  private dragStart: { x: number; y: number } | null = null;
  private dragRect: Rect | null = null;
  onBrush: (rect: Rect) => void = () => {};

  constructor(
    readonly kind: PanelKind,
    readonly width = 520,
    readonly height = 420,
    private readonly margin = 14,
  ) {
    this.canvas = document.createElement("canvas");
    this.canvas.width = width;
    this.canvas.height = height;
    this.canvas.className = `panel panel-${kind}`;
    this.ctx = this.canvas.getContext ? this.canvas.getContext("2d") : null;
    this.canvas.addEventListener("mousedown", (e) => this.startDrag(e));
    this.canvas.addEventListener("mousemove", (e) => this.moveDrag(e));
    this.canvas.addEventListener("mouseup", (e) => this.endDrag(e));
  }

  setData(points: CellPoint[], accessor: (p: CellPoint) => [number, number]): void {
    let xlo = Infinity,
      xhi = -Infinity,
      ylo = Infinity,
      yhi = -Infinity;
    for (const p of points) {
      const [x, y] = accessor(p);
      if (x < xlo) xlo = x;
      if (x > xhi) xhi = x;
      if (y < ylo) ylo = y;
      if (y > yhi) yhi = y;
    }
    if (!(xhi > xlo)) xhi = xlo + 1;
    if (!(yhi > ylo)) yhi = ylo + 1;
    this.bounds = { xlo, xhi, ylo, yhi };
  }

  dataToScreen(x: number, y: number): [number, number] {
    const { xlo, xhi, ylo, yhi } = this.bounds;
    const w = this.width - 2 * this.margin;
    const h = this.height - 2 * this.margin;
    const sx = this.margin + ((x - xlo) / (xhi - xlo)) * w;
    const sy = this.height - this.margin - ((y - ylo) / (yhi - ylo)) * h;
    return [sx, sy];
  }

  screenToData(sx: number, sy: number): [number, number] {
    const { xlo, xhi, ylo, yhi } = this.bounds;
    const w = this.width - 2 * this.margin;
    const h = this.height - 2 * this.margin;
    const x = xlo + ((sx - this.margin) / w) * (xhi - xlo);
    const y = ylo + ((this.height - this.margin - sy) / h) * (yhi - ylo);
    return [x, y];
  }

  render(points: PanelPoint[]): void {
    this.pointsCache = points;
    const ctx = this.ctx;
    if (!ctx) return; // headless test environment: state still updates
    ctx.clearRect(0, 0, this.width, this.height);
    ctx.fillStyle = "#fafafa";
    ctx.fillRect(0, 0, this.width, this.height);
    const anyHighlight = points.some((p) => p.highlighted);
    for (const p of points) {
      if (!p.visible) continue;
      ctx.globalAlpha = anyHighlight && !p.highlighted ? 0.25 : 0.9;
      ctx.fillStyle = p.color;
      ctx.beginPath();
      ctx.arc(p.x, p.y, p.highlighted ? 3.2 : 2.2, 0, Math.PI * 2);
      ctx.fill();
    }
    ctx.globalAlpha = 1.0;
    if (this.dragRect) {
      ctx.strokeStyle = "#555";
      ctx.setLineDash([4, 3]);
      const r = this.dragRect;
      ctx.strokeRect(r.x0, r.y0, r.x1 - r.x0, r.y1 - r.y0);
      ctx.setLineDash([]);
    }
  }

  private local(e: MouseEvent): { x: number; y: number } {
    const rect = this.canvas.getBoundingClientRect();
    return { x: e.clientX - rect.left, y: e.clientY - rect.top };
  }

  private startDrag(e: MouseEvent): void {
    this.dragStart = this.local(e);
    this.dragRect = null;
  }

  private moveDrag(e: MouseEvent): void {
    if (!this.dragStart) return;
    const cur = this.local(e);
    this.dragRect = {
      x0: this.dragStart.x,
      y0: this.dragStart.y,
      x1: cur.x,
      y1: cur.y,
    };
    this.render(this.pointsCache);
  }

  private endDrag(e: MouseEvent): void {
    if (!this.dragStart) return;
    const end = this.local(e);
    const start = this.dragStart;
    this.dragStart = null;
    this.dragRect = null;
    const [x0, y0] = this.screenToData(start.x, start.y);
    const [x1, y1] = this.screenToData(end.x, end.y);
    this.onBrush({ x0, y0, x1, y1 });
  }
}

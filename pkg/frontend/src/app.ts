import { ApiClient } from "./api.js";
import { drawHeatmap, drawHistogram, drawStructure } from "./charts.js";
import { labelColors, normalize, sequentialColor, categoricalColor } from "./colors.js";
import { ScatterPanel } from "./scatter.js";
import {
  applyClusters,
  brushSelect,
  initialState,
  isVisible,
  legendEntries,
  setColorMode,
  setFeature,
  setTab,
  toggleCellType,
  toggleCheckedCluster,
  toggleCheckedType,
  visibleIds,
  type ViewState,
} from "./state.js";
import type { CellPoint, ColorMode, PanelKind, Rect, SummariesResponse, Tab } from "./types.js";

const K_MIN = 2;
const K_MAX = 20;

export class App {
  state!: ViewState;
  points: CellPoint[] = [];
  readonly embedding: ScatterPanel;
  readonly spatial: ScatterPanel;
  lastSummaries: SummariesResponse | null = null;

  private featureValues = new Map<string, Map<string, number>>();
  private pendingK: number | null = null;
  private inFlight: Promise<void> | null = null;
  private els!: {
    legends: Record<PanelKind, HTMLElement>;
    slider: HTMLInputElement;
    kLabel: HTMLElement;
    banner: HTMLElement;
    typeBoxes: HTMLElement;
    clusterBoxes: HTMLElement;
    featureSelect: HTMLSelectElement;
    chart: HTMLCanvasElement;
    tabs: Record<Tab, HTMLButtonElement>;
  };

  constructor(
    readonly root: HTMLElement,
    readonly api: ApiClient,
  ) {
    this.embedding = new ScatterPanel("embedding");
    this.spatial = new ScatterPanel("spatial");
  }

  async init(): Promise<void> {
    const [meta, pts] = await Promise.all([this.api.meta(), this.api.points()]);
    this.points = pts.points;
    this.state = initialState(this.points, meta.k);
    this.embedding.setData(this.points, (p) => [p.embedding_x, p.embedding_y]);
    this.spatial.setData(this.points, (p) => [p.spatial_x, p.spatial_y]);
    this.buildDom(meta.feature_names);
    this.embedding.onBrush = (rect) => this.brush("embedding", rect);
    this.spatial.onBrush = (rect) => this.brush("spatial", rect);
    this.redraw();
    await this.refreshSummaries();
  }

  // ------------------------------------------------------------ interactions

  /** Brush in one panel's data space; both panels highlight the same ids. */
  brush(panel: PanelKind, rect: Rect): void {
    this.state = brushSelect(this.state, this.points, panel, rect);
    this.redraw();
  }

  /** Legend click: hide/show a cell type in BOTH panels. */
  toggleType(type: string): void {
    this.state = toggleCellType(this.state, this.points, type);
    this.redraw();
  }

  /** Slider-driven reclustering; at most one request in flight, later moves
   * coalesce to the latest k. On failure the previous clustering stays. */
  setK(k: number): Promise<void> {
    this.pendingK = k;
    if (!this.inFlight) {
      this.inFlight = this.drainRecluster().finally(() => {
        this.inFlight = null;
      });
    }
    return this.inFlight;
  }

  private async drainRecluster(): Promise<void> {
    while (this.pendingK !== null) {
      const k = this.pendingK;
      this.pendingK = null;
      try {
        const resp = await this.api.recluster(k);
        this.state = applyClusters(this.state, this.points, resp.k, resp.assignments);
        this.hideBanner();
      } catch (err) {
        this.showBanner(`reclustering failed: ${(err as Error).message}`);
      }
    }
    this.els.kLabel.textContent = `K = ${this.state.k}`;
    this.renderClusterBoxes();
    this.redraw();
    await this.refreshSummaries();
  }

  setColorMode(mode: ColorMode): void {
    this.state = setColorMode(this.state, mode);
    if (mode === "expression" && !this.state.selectedFeature) {
      this.state = setFeature(this.state, this.els.featureSelect.value || null);
    }
    void this.ensureFeatureValues().then(() => this.redraw());
  }

  async selectFeature(feature: string): Promise<void> {
    this.state = setFeature(this.state, feature);
    await this.ensureFeatureValues();
    this.redraw();
    await this.refreshSummaries();
  }

  async setTabAndRender(tab: Tab): Promise<void> {
    this.state = setTab(this.state, tab);
    for (const [name, btn] of Object.entries(this.els.tabs)) {
      btn.classList.toggle("active", name === tab);
    }
    await this.refreshSummaries();
  }

  // -------------------------------------------------------------- inspection

  highlightedIds(panel: PanelKind): Set<string> {
    void panel; // one shared selection set: the linkage invariant by construction
    return new Set(this.state.selection);
  }

  visibleIdsIn(panel: PanelKind): Set<string> {
    void panel;
    return visibleIds(this.state, this.points);
  }

  legendLabels(panel: PanelKind): string[] {
    const el = this.els.legends[panel];
    return [...el.querySelectorAll(".legend-entry")].map(
      (n) => (n as HTMLElement).dataset.label ?? "",
    );
  }

  // ----------------------------------------------------------------- drawing

  private colorFor(p: CellPoint, typeColors: Map<string, string>, ramp: (id: string) => string): string {
    switch (this.state.colorMode) {
      case "cell_type":
        return typeColors.get(p.cell_type) ?? "#999";
      case "cluster":
        return categoricalColor((this.state.clusters.get(p.id) ?? 1) - 1);
      case "expression":
        return ramp(p.id);
    }
  }

  private redraw(): void {
    const typeColors = labelColors(this.points.map((p) => p.cell_type));
    const ramp = this.expressionRamp();
    for (const [panel, view] of [
      ["embedding", this.embedding],
      ["spatial", this.spatial],
    ] as const) {
      const accessor =
        panel === "embedding"
          ? (p: CellPoint): [number, number] => [p.embedding_x, p.embedding_y]
          : (p: CellPoint): [number, number] => [p.spatial_x, p.spatial_y];
      view.render(
        this.points.map((p) => {
          const [sx, sy] = view.dataToScreen(...accessor(p));
          return {
            id: p.id,
            x: sx,
            y: sy,
            color: this.colorFor(p, typeColors, ramp),
            visible: isVisible(this.state, p),
            highlighted: this.state.selection.has(p.id),
          };
        }),
      );
    }
    this.renderLegends();
  }

  private expressionRamp(): (id: string) => string {
    const feature = this.state.selectedFeature;
    if (this.state.colorMode !== "expression" || !feature) return () => "#999";
    const values = this.featureValues.get(feature);
    if (!values) return () => "#999";
    const visible = this.points.filter((p) => isVisible(this.state, p));
    const norm = normalize(visible.map((p) => values.get(p.id) ?? 0));
    return (id) => sequentialColor(norm(values.get(id) ?? 0));
  }

  private async ensureFeatureValues(): Promise<void> {
    const feature = this.state.selectedFeature;
    if (!feature || this.featureValues.has(feature)) return;
    try {
      const resp = await this.api.expression(feature);
      const map = new Map<string, number>();
      this.points.forEach((p, i) => map.set(p.id, resp.values[i]));
      this.featureValues.set(feature, map);
    } catch (err) {
      this.showBanner(`expression fetch failed: ${(err as Error).message}`);
    }
  }

  private renderLegends(): void {
    const entries = legendEntries(this.state, this.points);
    const typeColors = labelColors(this.points.map((p) => p.cell_type));
    for (const panel of ["embedding", "spatial"] as const) {
      const el = this.els.legends[panel];
      el.textContent = "";
      for (const label of entries) {
        const item = document.createElement("span");
        item.className = "legend-entry";
        item.dataset.label = label;
        const color =
          this.state.colorMode === "cluster"
            ? categoricalColor(Number(label) - 1)
            : typeColors.get(label) ?? "#999";
        item.innerHTML = `<i style="background:${color}"></i>${label}`;
        if (this.state.colorMode === "cell_type") {
          item.classList.toggle("hidden-type", this.state.hiddenTypes.has(label));
          item.addEventListener("click", () => this.toggleType(label));
        }
        el.appendChild(item);
      }
    }
  }

  // ---------------------------------------------------------------- summaries

  /** Requests always carry the current checkbox sets; no summary can include
   * an unchecked cell type or cluster. */
  async refreshSummaries(): Promise<void> {
    const opts = {
      clusters: [...this.state.checkedClusters].sort((a, b) => a - b),
      cellTypes: [...this.state.checkedTypes].sort(),
      topN: 10,
      feature: this.state.selectedFeature ?? undefined,
    };
    try {
      const body = await this.api.summaries(opts);
      this.lastSummaries = body;
      this.hideBanner();
      this.renderChart();
    } catch (err) {
      this.showBanner(`summaries unavailable: ${(err as Error).message}`);
    }
  }

  private renderChart(): void {
    if (!this.lastSummaries) return;
    switch (this.state.activeTab) {
      case "heatmap":
        drawHeatmap(this.els.chart, this.lastSummaries);
        break;
      case "structure":
        drawStructure(this.els.chart, this.lastSummaries);
        break;
      case "histogram":
        drawHistogram(this.els.chart, this.lastSummaries);
        break;
    }
  }

  // --------------------------------------------------------------------- DOM

  private showBanner(message: string): void {
    this.els.banner.textContent = message;
    this.els.banner.style.display = "block";
  }

  private hideBanner(): void {
    this.els.banner.style.display = "none";
  }

  private renderClusterBoxes(): void {
    const box = this.els.clusterBoxes;
    box.textContent = "";
    const labels = [...new Set(this.state.clusters.values())].sort((a, b) => a - b);
    for (const c of labels) {
      const lab = document.createElement("label");
      const input = document.createElement("input");
      input.type = "checkbox";
      input.checked = this.state.checkedClusters.has(c);
      input.dataset.cluster = String(c);
      input.addEventListener("change", () => {
        this.state = toggleCheckedCluster(this.state, c);
        void this.refreshSummaries();
      });
      lab.append(input, ` ${c}`);
      box.appendChild(lab);
    }
  }

  private buildDom(featureNames: string[]): void {
    const root = this.root;
    root.textContent = "";

    const toolbar = document.createElement("div");
    toolbar.className = "toolbar";

    const modeBox = document.createElement("span");
    for (const mode of ["cell_type", "cluster", "expression"] as const) {
      const lab = document.createElement("label");
      const radio = document.createElement("input");
      radio.type = "radio";
      radio.name = "color-mode";
      radio.value = mode;
      radio.checked = mode === "cell_type";
      radio.addEventListener("change", () => this.setColorMode(mode));
      lab.append(radio, ` ${mode.replace("_", " ")}`);
      modeBox.appendChild(lab);
    }

    const slider = document.createElement("input");
    slider.type = "range";
    slider.min = String(K_MIN);
    slider.max = String(K_MAX);
    slider.value = String(this.state.k);
    slider.id = "k-slider";
    slider.addEventListener("input", () => void this.setK(Number(slider.value)));
    const kLabel = document.createElement("span");
    kLabel.id = "k-label";
    kLabel.textContent = `K = ${this.state.k}`;

    const featureSelect = document.createElement("select");
    featureSelect.id = "feature-select";
    for (const f of featureNames) {
      const opt = document.createElement("option");
      opt.value = f;
      opt.textContent = f;
      featureSelect.appendChild(opt);
    }
    featureSelect.addEventListener("change", () => void this.selectFeature(featureSelect.value));

    const banner = document.createElement("div");
    banner.className = "banner";
    banner.style.display = "none";

    toolbar.append(modeBox, slider, kLabel, featureSelect);
    root.append(toolbar, banner);

    const panels = document.createElement("div");
    panels.className = "panels";
    const legends: Record<PanelKind, HTMLElement> = {
      embedding: document.createElement("div"),
      spatial: document.createElement("div"),
    };
    for (const [kind, view] of [
      ["embedding", this.embedding],
      ["spatial", this.spatial],
    ] as const) {
      const box = document.createElement("div");
      box.className = "panel-box";
      const title = document.createElement("h3");
      title.textContent = kind === "embedding" ? "Embedding" : "Spatial";
      legends[kind].className = "legend";
      legends[kind].id = `legend-${kind}`;
      box.append(title, view.canvas, legends[kind]);
      panels.appendChild(box);
    }
    root.appendChild(panels);

    const filters = document.createElement("div");
    filters.className = "filters";
    const typeBoxes = document.createElement("span");
    typeBoxes.id = "type-boxes";
    for (const t of [...new Set(this.points.map((p) => p.cell_type))].sort()) {
      const lab = document.createElement("label");
      const input = document.createElement("input");
      input.type = "checkbox";
      input.checked = true;
      input.dataset.cellType = t;
      input.addEventListener("change", () => {
        this.state = toggleCheckedType(this.state, t);
        void this.refreshSummaries();
      });
      lab.append(input, ` ${t}`);
      typeBoxes.appendChild(lab);
    }
    const clusterBoxes = document.createElement("span");
    clusterBoxes.id = "cluster-boxes";
    filters.append("Cell types: ", typeBoxes, " Clusters: ", clusterBoxes);
    root.appendChild(filters);

    const tabsBar = document.createElement("div");
    tabsBar.className = "tabs";
    const tabs = {} as Record<Tab, HTMLButtonElement>;
    for (const tab of ["heatmap", "structure", "histogram"] as const) {
      const btn = document.createElement("button");
      btn.textContent = tab;
      btn.dataset.tab = tab;
      btn.classList.toggle("active", tab === "heatmap");
      btn.addEventListener("click", () => void this.setTabAndRender(tab));
      tabs[tab] = btn;
      tabsBar.appendChild(btn);
    }
    const chart = document.createElement("canvas");
    chart.width = 720;
    chart.height = 360;
    chart.id = "chart";
    root.append(tabsBar, chart);

    this.els = { legends, slider, kLabel, banner, typeBoxes, clusterBoxes, featureSelect, chart, tabs };
    this.renderClusterBoxes();
  }
}

export async function createApp(root: HTMLElement, api: ApiClient): Promise<App> {
  const app = new App(root, api);
  await app.init();
  return app;
}

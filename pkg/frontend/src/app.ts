// Explorer controller: linked series + embedding views, compare mode, and
// region queries. The UI performs zero numerical algorithms; every displayed
// quantity is either the uploaded file itself or a service response.

import { ApiError, TimelensClient } from "./api.js";
import { renderScatter, renderSeries, svgEl, clear, type ScatterView } from "./render.js";
import { pickPoints, type Rect } from "./selection.js";
import {
  clampTimeRange,
  clampWindows,
  debounce,
  initialState,
  RequestGate,
  type ViewState,
} from "./state.js";
import type { EmbeddingMethod, EmbeddingResponse } from "./types.js";

const SERIES_W = 860;
const SERIES_H = 180;
const SCATTER_W = 420;
const SCATTER_H = 360;

type InteractionMode = "brush" | "region";

export class ExplorerApp {
  readonly state: ViewState;
  seriesValues: number[][] = [];
  forecastOverlay: number[][] | null = null;
  entryMarker: { t: number; label: string } | null = null;
  mode: InteractionMode = "brush";

  private readonly embeddingGate = new RequestGate();
  private readonly selectionGate = new RequestGate();
  private scatterViews = new Map<string, ScatterView>();
  private readonly refreshDebounced: () => void;

  readonly seriesSvg: SVGSVGElement;
  readonly embeddingsBox: HTMLDivElement;
  readonly residualBadge: HTMLSpanElement;
  readonly answerBox: HTMLSpanElement;
  readonly statusBox: HTMLSpanElement;

  constructor(
    readonly root: HTMLElement,
    readonly client: TimelensClient,
    debounceMs = 150,
  ) {
    this.state = initialState();
    this.refreshDebounced = debounce(() => void this.refreshEmbedding(), debounceMs);

    root.innerHTML = "";
    const controls = document.createElement("div");
    controls.className = "controls";
    root.appendChild(controls);
    this.buildControls(controls);

    const badges = document.createElement("div");
    badges.className = "badges";
    this.residualBadge = document.createElement("span");
    this.residualBadge.className = "residual-badge";
    this.residualBadge.hidden = true;
    this.answerBox = document.createElement("span");
    this.answerBox.className = "region-answer";
    this.statusBox = document.createElement("span");
    this.statusBox.className = "status";
    badges.append(this.residualBadge, this.answerBox, this.statusBox);
    root.appendChild(badges);

    this.seriesSvg = svgEl("svg");
    this.seriesSvg.classList.add("series");
    root.appendChild(this.seriesSvg);
    this.attachSeriesBrush();

    this.embeddingsBox = document.createElement("div");
    this.embeddingsBox.className = "embeddings";
    root.appendChild(this.embeddingsBox);
  }

  private buildControls(box: HTMLElement): void {
    box.innerHTML = `
      <label>data <input type="file" data-role="file-input" accept=".csv,text/csv"></label>
      <label><input type="checkbox" data-role="has-header"> header row</label>
      <label>L <input type="number" data-role="ctl-L" min="1" value="${this.state.L}"></label>
      <label>rank <input type="number" data-role="ctl-rank" min="1" value="${this.state.rank ?? ""}"></label>
      <label>method <select data-role="ctl-method">
        <option value="timecluster">timecluster</option>
        <option value="subspace">subspace</option>
      </select></label>
      <label><input type="checkbox" data-role="ctl-center"> center</label>
      <label><input type="checkbox" data-role="ctl-scale"> scale</label>
      <label><input type="checkbox" data-role="ctl-compare"> compare</label>
      <label><input type="checkbox" data-role="ctl-split"> split pairs</label>
      <label>horizon <input type="number" data-role="ctl-horizon" min="1" value="${this.state.horizon}"></label>
      <button data-role="ctl-forecast">overlay forecast</button>
      <button data-role="ctl-mode">mode: brush</button>
      <button data-role="ctl-clear">clear selection</button>
    `;
    const pick = <T extends Element>(role: string) => box.querySelector<T>(`[data-role="${role}"]`)!;
    const input = pick<HTMLInputElement>("file-input");
    input.addEventListener("change", () => {
      const file = input.files?.[0];
      if (!file) return;
      const hasHeader = pick<HTMLInputElement>("has-header").checked;
      void file.text().then((text) => this.loadCsvText(text, hasHeader));
    });
    const bindNumber = (role: string, apply: (v: number | null) => void) => {
      const el = pick<HTMLInputElement>(role);
      el.addEventListener("input", () => {
        const v = el.value === "" ? null : Number(el.value);
        apply(v !== null && Number.isFinite(v) ? v : null);
        this.refreshDebounced();
      });
    };
    bindNumber("ctl-L", (v) => (this.state.L = Math.max(1, Math.round(v ?? 1))));
    bindNumber("ctl-rank", (v) => (this.state.rank = v === null ? null : Math.max(1, Math.round(v))));
    bindNumber("ctl-horizon", (v) => (this.state.horizon = Math.max(1, Math.round(v ?? 1))));
    pick<HTMLSelectElement>("ctl-method").addEventListener("change", (ev) => {
      this.state.method = (ev.target as HTMLSelectElement).value as EmbeddingMethod;
      this.refreshDebounced();
    });
    const bindFlag = (role: string, apply: (v: boolean) => void) => {
      const el = pick<HTMLInputElement>(role);
      el.addEventListener("change", () => {
        apply(el.checked);
        this.refreshDebounced();
      });
    };
    bindFlag("ctl-center", (v) => (this.state.center = v));
    bindFlag("ctl-scale", (v) => (this.state.scale = v));
    bindFlag("ctl-compare", (v) => (this.state.compareMode = v));
    bindFlag("ctl-split", (v) => (this.state.splitMode = v));
    pick<HTMLButtonElement>("ctl-forecast").addEventListener("click", () => void this.overlayForecast());
    const modeBtn = pick<HTMLButtonElement>("ctl-mode");
    modeBtn.addEventListener("click", () => {
      this.mode = this.mode === "brush" ? "region" : "brush";
      modeBtn.textContent = `mode: ${this.mode}`;
    });
    pick<HTMLButtonElement>("ctl-clear").addEventListener("click", () => this.clearSelection());
  }

  // ---- data loading -------------------------------------------------------

  parseCsv(text: string, hasHeader: boolean): number[][] {
    const lines = text.split(/\r?\n/).filter((line) => line.trim() !== "");
    const rows = hasHeader ? lines.slice(1) : lines;
    return rows.map((line) => line.split(",").map((cell) => Number(cell)));
  }

  async loadCsvText(text: string, hasHeader = false): Promise<void> {
    try {
      const meta = await this.client.uploadCsv(text, hasHeader);
      this.state.datasetId = meta.id;
      this.state.T = meta.T;
      this.state.D = meta.D;
      this.seriesValues = this.parseCsv(text, hasHeader);
      this.forecastOverlay = null;
      this.entryMarker = null;
      this.state.selectedWindows = [];
      this.state.highlightedRanges = [];
      this.state.highlightedWindows = [];
      this.setStatus(`loaded ${meta.id}: T=${meta.T}, D=${meta.D}`);
      await this.refreshEmbedding();
    } catch (err) {
      this.reportError(err);
    }
  }

  // ---- embedding fetch ----------------------------------------------------

  private params(method: EmbeddingMethod) {
    return {
      L: this.state.L,
      rank: this.state.rank,
      epsilon: this.state.epsilon,
      method,
      center: this.state.center,
      scale: this.state.scale,
    };
  }

  async refreshEmbedding(): Promise<void> {
    if (!this.state.datasetId) return;
    const token = this.embeddingGate.issue();
    this.state.embedding = null;
    this.state.otherEmbedding = null;
    this.renderBadges();
    try {
      const main = await this.client.embedding(this.state.datasetId, this.params(this.state.method));
      let other: EmbeddingResponse | null = null;
      if (this.state.compareMode) {
        const otherMethod: EmbeddingMethod = this.state.method === "timecluster" ? "subspace" : "timecluster";
        other = await this.client.embedding(this.state.datasetId, this.params(otherMethod));
      }
      if (!this.embeddingGate.isCurrent(token)) return; // stale response discarded
      this.state.embedding = main;
      this.state.otherEmbedding = other;
      this.setStatus(`r=${main.r}, residual vs other method ${main.alignment_residual.toExponential(2)}`);
      this.renderAll();
    } catch (err) {
      if (this.embeddingGate.isCurrent(token)) this.reportError(err);
    }
  }

  // ---- linked selection ---------------------------------------------------

  async brushEmbedding(rect: Rect, panel = "main"): Promise<void> {
    const view = this.scatterViews.get(panel);
    if (!view || !this.state.datasetId) return;
    const picked = clampWindows(this.state, pickPoints(view.points, rect));
    this.state.selectedWindows = picked;
    this.state.selectedTimeRange = null;
    const token = this.selectionGate.issue();
    if (picked.length === 0) {
      this.state.highlightedRanges = [];
      this.state.highlightedWindows = [];
      this.renderAll();
      return;
    }
    try {
      const response = await this.client.selectWindows(this.state.datasetId, picked, this.state.L);
      if (!this.selectionGate.isCurrent(token)) return;
      // Server's ranges verbatim; highlighted scatter points are the brushed ones.
      this.state.highlightedRanges = response.time_ranges;
      this.state.highlightedWindows = picked;
      this.renderAll();
    } catch (err) {
      this.reportError(err);
    }
  }

  async brushSeriesRange(t0: number, t1: number): Promise<void> {
    if (!this.state.datasetId) return;
    const range = clampTimeRange(this.state, [Math.round(t0), Math.round(t1)]);
    if (!range) return;
    this.state.selectedTimeRange = range;
    this.state.selectedWindows = [];
    const token = this.selectionGate.issue();
    try {
      const response = await this.client.selectTimeRange(this.state.datasetId, range, this.state.L);
      if (!this.selectionGate.isCurrent(token)) return;
      this.state.highlightedWindows = clampWindows(this.state, response.window_indices);
      this.state.highlightedRanges = [range];
      this.renderAll();
    } catch (err) {
      this.reportError(err);
    }
  }

  clearSelection(): void {
    this.state.selectedWindows = [];
    this.state.selectedTimeRange = null;
    this.state.highlightedRanges = [];
    this.state.highlightedWindows = [];
    this.renderAll();
  }

  // ---- forecasting and region queries --------------------------------------

  async overlayForecast(): Promise<void> {
    if (!this.state.datasetId) return;
    try {
      const response = await this.client.forecast(
        this.state.datasetId,
        this.state.L,
        this.state.horizon,
        this.state.rank,
        this.state.epsilon,
      );
      this.forecastOverlay = response.predicted_outputs;
      this.renderAll();
    } catch (err) {
      this.reportError(err);
    }
  }

  async runRegionQuery(center: [number, number], radius: number): Promise<void> {
    if (!this.state.datasetId) return;
    try {
      const response = await this.client.regionQuery(
        this.state.datasetId,
        this.state.L,
        { center, radius },
        this.state.horizon,
        this.state.rank,
        this.state.epsilon,
      );
      this.state.regionAnswer = response.steps_until_entry;
      this.state.regionAnswerKnown = true;
      if (response.steps_until_entry === null) {
        this.entryMarker = null;
      } else {
        this.entryMarker = {
          t: this.state.T - 1 + response.steps_until_entry,
          label: `entry in ${response.steps_until_entry} steps`,
        };
      }
      this.renderAll();
    } catch (err) {
      this.reportError(err);
    }
  }

  // ---- rendering ----------------------------------------------------------

  renderAll(): void {
    renderSeries(this.seriesSvg, this.seriesValues, {
      width: SERIES_W,
      height: SERIES_H,
      highlightedRanges: this.state.highlightedRanges,
      forecast: this.forecastOverlay,
      marker: this.entryMarker,
    });

    clear(this.embeddingsBox);
    this.scatterViews.clear();
    const embedding = this.state.embedding;
    if (!embedding) {
      this.renderBadges();
      return;
    }
    const highlighted = new Set(this.state.highlightedWindows);
    if (this.state.splitMode && embedding.r >= 2) {
      const pairs = Math.floor(embedding.r / 2);
      for (let p = 0; p < pairs; p++) {
        const coords = embedding.coords.map((row) => [row[2 * p], row[2 * p + 1]]);
        this.addScatterPanel(`pair${p}`, coords, `components ${2 * p + 1},${2 * p + 2}`, highlighted);
      }
      if (embedding.r % 2 === 1) this.setStatus(`odd rank ${embedding.r}: last component not shown`);
    } else {
      this.addScatterPanel("main", embedding.coords, this.state.method, highlighted);
    }
    if (this.state.compareMode && this.state.otherEmbedding) {
      const otherMethod = this.state.method === "timecluster" ? "subspace" : "timecluster";
      this.addScatterPanel("other", this.state.otherEmbedding.coords, otherMethod, highlighted);
    }
    this.renderBadges();
  }

  private addScatterPanel(key: string, coords: number[][], title: string, highlighted: Set<number>): void {
    const svg = svgEl("svg");
    svg.classList.add("embedding");
    svg.dataset.panel = key;
    this.embeddingsBox.appendChild(svg);
    const view = renderScatter(svg, coords, {
      width: SCATTER_W,
      height: SCATTER_H,
      highlighted,
      title,
    });
    this.scatterViews.set(key, view);
    this.attachScatterBrush(svg, key);
  }

  private renderBadges(): void {
    const both = this.state.embedding && (this.state.otherEmbedding || !this.state.compareMode);
    if (this.state.compareMode && this.state.embedding && this.state.otherEmbedding) {
      const residual = this.state.embedding.alignment_residual;
      this.residualBadge.hidden = false;
      this.residualBadge.dataset.value = String(residual);
      this.residualBadge.textContent = `alignment residual ${residual.toExponential(3)}`;
    } else {
      this.residualBadge.hidden = true;
      delete this.residualBadge.dataset.value;
    }
    if (!both) this.residualBadge.hidden = true;
    if (this.state.regionAnswerKnown) {
      this.answerBox.textContent =
        this.state.regionAnswer === null
          ? "no entry within horizon"
          : `next entry: ${this.state.regionAnswer} steps ahead`;
      this.answerBox.dataset.value = String(this.state.regionAnswer);
    } else {
      this.answerBox.textContent = "";
    }
  }

  private setStatus(text: string): void {
    this.statusBox.textContent = text;
  }

  private reportError(err: unknown): void {
    const message = err instanceof ApiError ? `service error ${err.status}: ${err.message}` : String(err);
    this.statusBox.textContent = message;
    this.statusBox.classList.add("error");
  }

  // ---- pointer plumbing ---------------------------------------------------

  private svgPoint(svg: SVGSVGElement, ev: PointerEvent, width: number, height: number): { x: number; y: number } {
    const box = svg.getBoundingClientRect();
    const x = ((ev.clientX - box.left) / (box.width || 1)) * width;
    const y = ((ev.clientY - box.top) / (box.height || 1)) * height;
    return { x, y };
  }

  private attachScatterBrush(svg: SVGSVGElement, key: string): void {
    let start: { x: number; y: number } | null = null;
    svg.addEventListener("pointerdown", (ev) => {
      start = this.svgPoint(svg, ev, SCATTER_W, SCATTER_H);
    });
    svg.addEventListener("pointerup", (ev) => {
      if (!start) return;
      const end = this.svgPoint(svg, ev, SCATTER_W, SCATTER_H);
      const rect: Rect = { x0: start.x, y0: start.y, x1: end.x, y1: end.y };
      start = null;
      const view = this.scatterViews.get(key);
      if (!view) return;
      if (this.mode === "region") {
        const cx = (rect.x0 + rect.x1) / 2;
        const cy = (rect.y0 + rect.y1) / 2;
        const rPx = Math.hypot(rect.x1 - rect.x0, rect.y1 - rect.y0) / 2 || 8;
        const center: [number, number] = [view.xScale.invert(cx), view.yScale.invert(cy)];
        const radius = Math.abs(view.xScale.invert(cx + rPx) - view.xScale.invert(cx));
        void this.runRegionQuery(center, radius);
      } else {
        void this.brushEmbedding(rect, key);
      }
    });
  }

  private attachSeriesBrush(): void {
    let startX: number | null = null;
    this.seriesSvg.addEventListener("pointerdown", (ev) => {
      startX = this.svgPoint(this.seriesSvg, ev, SERIES_W, SERIES_H).x;
    });
    this.seriesSvg.addEventListener("pointerup", (ev) => {
      if (startX === null) return;
      const endX = this.svgPoint(this.seriesSvg, ev, SERIES_W, SERIES_H).x;
      const T = this.seriesValues.length;
      if (T === 0) return;
      // invert through the same layout scale used by renderSeries
      const horizon = this.forecastOverlay?.length ?? 0;
      const domainMax = Math.max(T - 1 + horizon, 1);
      const invert = (px: number) => ((px - 40) / (SERIES_W - 10 - 40)) * domainMax;
      void this.brushSeriesRange(invert(Math.min(startX, endX)), invert(Math.max(startX, endX)));
      startX = null;
    });
  }
}

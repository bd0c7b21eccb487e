// SVG rendering for the linked views. Pure DOM construction; every number
// drawn here arrives from server responses or the uploaded file.

import { extent, linearScale, padded, type LinearScale } from "./scales.js";
import { sampleHighlighted } from "./selection.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export function svgEl<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string | number> = {},
): SVGElementTagNameMap[K] {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, String(value));
  }
  return node;
}

export function clear(node: Element): void {
  while (node.firstChild) node.removeChild(node.firstChild);
}

/** Colour along the temporal order, early samples cool, late samples warm. */
export function timeColor(index: number, total: number): string {
  const t = total > 1 ? index / (total - 1) : 0;
  const hue = 240 - 200 * t;
  return `hsl(${hue.toFixed(0)}, 70%, 50%)`;
}

export interface SeriesView {
  xScale: LinearScale;
  yScale: LinearScale;
}

export interface SeriesOptions {
  width: number;
  height: number;
  highlightedRanges: [number, number][];
  forecast?: number[][] | null;
  marker?: { t: number; label: string } | null;
}

export function renderSeries(svg: SVGSVGElement, values: number[][], opts: SeriesOptions): SeriesView {
  clear(svg);
  svg.setAttribute("viewBox", `0 0 ${opts.width} ${opts.height}`);
  const T = values.length;
  const horizon = opts.forecast?.length ?? 0;
  const xScale = linearScale([0, Math.max(T - 1 + horizon, 1)], [40, opts.width - 10]);
  const flat = values.flat().concat(opts.forecast?.flat() ?? []);
  const yScale = linearScale(padded(extent(flat)), [opts.height - 18, 8]);

  for (const [lo, hi] of opts.highlightedRanges) {
    svg.appendChild(
      svgEl("rect", {
        class: "series-highlight",
        x: xScale(lo) - 2,
        y: 4,
        width: Math.max(xScale(hi) - xScale(lo) + 4, 3),
        height: opts.height - 22,
      }),
    );
  }

  const D = values[0]?.length ?? 0;
  for (let ch = 0; ch < D; ch++) {
    const pts = values.map((row, t) => `${xScale(t)},${yScale(row[ch])}`).join(" ");
    svg.appendChild(svgEl("polyline", { class: `series-line ch${ch}`, points: pts, fill: "none" }));
    const highlighted = values
      .map((row, t) => ({ row, t }))
      .filter(({ t }) => sampleHighlighted(opts.highlightedRanges, t));
    for (const { row, t } of highlighted) {
      svg.appendChild(
        svgEl("circle", { class: "series-point-highlight", cx: xScale(t), cy: yScale(row[ch]), r: 2.5 }),
      );
    }
    if (opts.forecast && opts.forecast.length > 0) {
      const fpts = opts.forecast.map((row, k) => `${xScale(T + k)},${yScale(row[ch])}`).join(" ");
      svg.appendChild(svgEl("polyline", { class: `forecast-line ch${ch}`, points: fpts, fill: "none" }));
    }
  }

  if (opts.marker) {
    const x = xScale(opts.marker.t);
    svg.appendChild(svgEl("line", { class: "entry-marker", x1: x, y1: 4, x2: x, y2: opts.height - 18 }));
    const label = svgEl("text", { class: "entry-marker-label", x: x + 4, y: 14 });
    label.textContent = opts.marker.label;
    svg.appendChild(label);
  }
  return { xScale, yScale };
}

export interface ScatterOptions {
  width: number;
  height: number;
  highlighted: Set<number>;
  title?: string;
  region?: { cx: number; cy: number; r: number } | null;
}

export interface ScatterView {
  xScale: LinearScale;
  yScale: LinearScale;
  points: { x: number; y: number }[];
}

export function renderScatter(svg: SVGSVGElement, coords: number[][], opts: ScatterOptions): ScatterView {
  clear(svg);
  svg.setAttribute("viewBox", `0 0 ${opts.width} ${opts.height}`);
  const xs = coords.map((c) => c[0]);
  const ys = coords.map((c) => c[1] ?? 0);
  const xScale = linearScale(padded(extent(xs)), [10, opts.width - 10]);
  const yScale = linearScale(padded(extent(ys)), [opts.height - 10, 18]);
  const points = coords.map((c) => ({ x: xScale(c[0]), y: yScale(c[1] ?? 0) }));

  if (opts.title) {
    const title = svgEl("text", { class: "panel-title", x: 10, y: 12 });
    title.textContent = opts.title;
    svg.appendChild(title);
  }

  // Connect consecutive windows so loops and transitions stay visible.
  const path = points.map((p) => `${p.x},${p.y}`).join(" ");
  svg.appendChild(svgEl("polyline", { class: "scatter-path", points: path, fill: "none" }));

  points.forEach((p, i) => {
    const attrs: Record<string, string | number> = {
      class: opts.highlighted.has(i) ? "scatter-point highlighted" : "scatter-point",
      cx: p.x,
      cy: p.y,
      r: opts.highlighted.has(i) ? 4 : 2.5,
      "data-window": i,
    };
    const circle = svgEl("circle", attrs);
    if (!opts.highlighted.has(i)) circle.setAttribute("fill", timeColor(i, points.length));
    svg.appendChild(circle);
  });

  if (opts.region) {
    svg.appendChild(
      svgEl("circle", { class: "region-circle", cx: opts.region.cx, cy: opts.region.cy, r: opts.region.r }),
    );
  }
  return { xScale, yScale, points };
}

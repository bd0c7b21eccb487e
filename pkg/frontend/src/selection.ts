// Brush geometry: picking rendered points and samples inside screen-space
// brushes. Which time ranges a window covers is the server's call via
// /selection; nothing here maps windows to samples.

export interface Rect {
  x0: number;
  y0: number;
  x1: number;
  y1: number;
}

export function normalizeRect(rect: Rect): Rect {
  return {
    x0: Math.min(rect.x0, rect.x1),
    y0: Math.min(rect.y0, rect.y1),
    x1: Math.max(rect.x0, rect.x1),
    y1: Math.max(rect.y0, rect.y1),
  };
}

/** Indices of screen-space points falling inside the brush rectangle. */
export function pickPoints(points: { x: number; y: number }[], rect: Rect): number[] {
  const r = normalizeRect(rect);
  const picked: number[] = [];
  points.forEach((p, i) => {
    if (p.x >= r.x0 && p.x <= r.x1 && p.y >= r.y0 && p.y <= r.y1) picked.push(i);
  });
  return picked;
}

/** Is sample t inside any of the (inclusive) highlighted ranges? */
export function sampleHighlighted(ranges: [number, number][], t: number): boolean {
  return ranges.some(([lo, hi]) => t >= lo && t <= hi);
}

/** Total number of samples covered by the ranges (assumed merged/disjoint). */
export function highlightedSampleCount(ranges: [number, number][]): number {
  return ranges.reduce((acc, [lo, hi]) => acc + (hi - lo + 1), 0);
}

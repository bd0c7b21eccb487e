// View state, request sequencing, and parameter debouncing.
//
// The explorer renders exclusively from server responses; this module only
// tracks which responses are current and what the analyst has selected.

import type { EmbeddingMethod, EmbeddingResponse } from "./types.js";

export interface ViewState {
  datasetId: string | null;
  T: number;
  D: number;
  L: number;
  rank: number | null;
  epsilon: number | null;
  method: EmbeddingMethod;
  center: boolean;
  scale: boolean;
  compareMode: boolean;
  splitMode: boolean;
  horizon: number;
  embedding: EmbeddingResponse | null;
  otherEmbedding: EmbeddingResponse | null;
  selectedWindows: number[];
  selectedTimeRange: [number, number] | null;
  highlightedRanges: [number, number][];
  highlightedWindows: number[];
  regionAnswer: number | null;
  regionAnswerKnown: boolean;
}

export function initialState(): ViewState {
  return {
    datasetId: null,
    T: 0,
    D: 0,
    L: 8,
    rank: 2,
    epsilon: null,
    method: "timecluster",
    center: false,
    scale: false,
    compareMode: false,
    splitMode: false,
    horizon: 50,
    embedding: null,
    otherEmbedding: null,
    selectedWindows: [],
    selectedTimeRange: null,
    highlightedRanges: [],
    highlightedWindows: [],
    regionAnswer: null,
    regionAnswerKnown: false,
  };
}

export function windowCount(state: ViewState): number {
  return state.T >= state.L && state.L >= 1 ? state.T - state.L + 1 : 0;
}

export function clampWindows(state: ViewState, indices: number[]): number[] {
  const W = windowCount(state);
  return indices.filter((i) => Number.isInteger(i) && i >= 0 && i < W);
}

export function clampTimeRange(state: ViewState, range: [number, number]): [number, number] | null {
  const lo = Math.max(0, Math.min(range[0], range[1]));
  const hi = Math.min(state.T - 1, Math.max(range[0], range[1]));
  return lo <= hi ? [lo, hi] : null;
}

/** Monotone tokens so stale responses are discarded, last-write-wins. */
export class RequestGate {
  private counter = 0;
  private current = 0;

  issue(): number {
    this.current = ++this.counter;
    return this.current;
  }

  isCurrent(token: number): boolean {
    return token === this.current;
  }
}

export function debounce<A extends unknown[]>(fn: (...args: A) => void, delayMs: number): (...args: A) => void {
  let handle: ReturnType<typeof setTimeout> | undefined;
  return (...args: A) => {
    if (handle !== undefined) clearTimeout(handle);
    handle = setTimeout(() => fn(...args), delayMs);
  };
}

// Wire types mirroring the timelens service JSON responses.

export interface DatasetMeta {
  id: string;
  T: number;
  D: number;
  channel_names: string[] | null;
}

export type EmbeddingMethod = "timecluster" | "subspace";

export interface EmbeddingResponse {
  L: number;
  r: number;
  source: string;
  coords: number[][];
  window_start_indices: number[];
  singular_values: number[];
  alignment_residual: number;
}

export interface SelectionByWindows {
  window_indices: number[];
  L: number;
}

export interface SelectionByTimeRange {
  time_range: [number, number];
  L: number;
}

export interface TimeRangesResponse {
  time_ranges: [number, number][];
}

export interface WindowIndicesResponse {
  window_indices: number[];
}

export interface ForecastResponse {
  horizon: number;
  predicted_outputs: number[][];
  predicted_states: number[][];
  output_covariances: number[][][];
}

export type Region =
  | { center: number[]; radius: number }
  | { min: number[]; max: number[] };

export interface RegionQueryResponse {
  steps_until_entry: number | null;
}

export interface EmbeddingParams {
  L: number;
  rank?: number | null;
  epsilon?: number | null;
  method: EmbeddingMethod;
  center: boolean;
  scale: boolean;
}

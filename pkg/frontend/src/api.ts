// Thin typed client for the timelens service. All numerical results shown in
// the UI flow through these calls; nothing is recomputed client-side.

import type {
  DatasetMeta,
  EmbeddingParams,
  EmbeddingResponse,
  ForecastResponse,
  Region,
  RegionQueryResponse,
  TimeRangesResponse,
  WindowIndicesResponse,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function asJson<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = await response.json();
      if (body && typeof body.detail === "string") detail = body.detail;
    } catch {
      // keep the status text
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

export class TimelensClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  embeddingUrl(datasetId: string, params: EmbeddingParams): string {
    const query = new URLSearchParams({ L: String(params.L), method: params.method });
    if (params.rank != null) query.set("rank", String(params.rank));
    if (params.epsilon != null) query.set("epsilon", String(params.epsilon));
    if (params.center) query.set("center", "true");
    if (params.scale) query.set("scale", "true");
    return `${this.baseUrl}/datasets/${encodeURIComponent(datasetId)}/embedding?${query}`;
  }

  async uploadCsv(raw: string | Blob, hasHeader = false): Promise<DatasetMeta> {
    const query = hasHeader ? "?has_header=true" : "";
    const response = await this.fetchImpl(`${this.baseUrl}/datasets${query}`, {
      method: "POST",
      headers: { "content-type": "text/csv" },
      body: raw,
    });
    return asJson<DatasetMeta>(response);
  }

  async embedding(datasetId: string, params: EmbeddingParams): Promise<EmbeddingResponse> {
    const response = await this.fetchImpl(this.embeddingUrl(datasetId, params));
    return asJson<EmbeddingResponse>(response);
  }

  async selectWindows(datasetId: string, windowIndices: number[], L: number): Promise<TimeRangesResponse> {
    const response = await this.fetchImpl(`${this.baseUrl}/datasets/${encodeURIComponent(datasetId)}/selection`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ window_indices: windowIndices, L }),
    });
    return asJson<TimeRangesResponse>(response);
  }

  async selectTimeRange(datasetId: string, timeRange: [number, number], L: number): Promise<WindowIndicesResponse> {
    const response = await this.fetchImpl(`${this.baseUrl}/datasets/${encodeURIComponent(datasetId)}/selection`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ time_range: timeRange, L }),
    });
    return asJson<WindowIndicesResponse>(response);
  }

  async forecast(datasetId: string, L: number, h: number, rank?: number | null, epsilon?: number | null): Promise<ForecastResponse> {
    const body: Record<string, unknown> = { L, h };
    if (rank != null) body.rank = rank;
    if (epsilon != null) body.epsilon = epsilon;
    const response = await this.fetchImpl(`${this.baseUrl}/datasets/${encodeURIComponent(datasetId)}/forecast`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    return asJson<ForecastResponse>(response);
  }

  async regionQuery(
    datasetId: string,
    L: number,
    region: Region,
    horizon: number,
    rank?: number | null,
    epsilon?: number | null,
  ): Promise<RegionQueryResponse> {
    const body: Record<string, unknown> = { L, region, horizon };
    if (rank != null) body.rank = rank;
    if (epsilon != null) body.epsilon = epsilon;
    const response = await this.fetchImpl(`${this.baseUrl}/datasets/${encodeURIComponent(datasetId)}/region-query`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    return asJson<RegionQueryResponse>(response);
  }
}

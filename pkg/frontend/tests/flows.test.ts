// @vitest-environment jsdom
//
// Linked-view flows against a scripted service. Canned bodies are frozen
// from real timelens-service responses; the assertions check that what the
// UI shows is exactly what the service said, never a local recomputation.

import { beforeEach, describe, expect, it } from "vitest";

import { TimelensClient } from "../src/api.js";
import { ExplorerApp } from "../src/app.js";
import { mockService, paperEmbedding, PAPER_CSV, type MockService } from "./helpers.js";

function makeApp(service: MockService): ExplorerApp {
  const root = document.createElement("div");
  document.body.appendChild(root);
  return new ExplorerApp(root, new TimelensClient("", service.fetch), 0);
}

function paperRoutes(service: MockService): void {
  service.routes.set("POST /datasets", { id: "ds-1", T: 4, D: 2, channel_names: null });
  service.routes.set("GET /datasets/ds-1/embedding", () => paperEmbedding());
}

async function loadPaper(app: ExplorerApp): Promise<void> {
  app.state.L = 2;
  app.state.rank = 2;
  await app.loadCsvText(PAPER_CSV);
}

function brushRectAround(app: ExplorerApp, windows: number[]) {
  const circles = [...app.embeddingsBox.querySelectorAll<SVGCircleElement>("circle[data-window]")].filter((c) =>
    windows.includes(Number(c.dataset.window)),
  );
  const xs = circles.map((c) => Number(c.getAttribute("cx")));
  const ys = circles.map((c) => Number(c.getAttribute("cy")));
  return {
    x0: Math.min(...xs) - 1,
    y0: Math.min(...ys) - 1,
    x1: Math.max(...xs) + 1,
    y1: Math.max(...ys) + 1,
  };
}

describe("linked brushing", () => {
  let service: MockService;
  let app: ExplorerApp;

  beforeEach(async () => {
    document.body.innerHTML = "";
    service = mockService();
    paperRoutes(service);
    app = makeApp(service);
    await loadPaper(app);
  });

  it("brushing windows {0,1} highlights samples [0, 2] via the service", async () => {
    service.routes.set("POST /datasets/ds-1/selection", { time_ranges: [[0, 2]] });
    await app.brushEmbedding(brushRectAround(app, [0, 1]));

    const selectionCall = service.log.find((r) => r.url.endsWith("/selection"));
    expect(selectionCall?.body).toEqual({ window_indices: [0, 1], L: 2 });
    expect(app.state.highlightedRanges).toEqual([[0, 2]]);
    // samples 0..2 are marked on the series plot for both channels
    const marks = app.seriesSvg.querySelectorAll(".series-point-highlight");
    expect(marks.length).toBe(3 * 2);

  });

  it("displays the server's ranges verbatim, even when they look wrong", async () => {
    // If the UI recomputed w -> [w, w+L-1] locally it would show [[0, 2]].
    service.routes.set("POST /datasets/ds-1/selection", { time_ranges: [[0, 1]] });
    await app.brushEmbedding(brushRectAround(app, [0, 1]));
    expect(app.state.highlightedRanges).toEqual([[0, 1]]);
    expect(app.seriesSvg.querySelectorAll(".series-point-highlight").length).toBe(2 * 2);
  });

  it("empty brush clears highlights without a service call", async () => {
    service.routes.set("POST /datasets/ds-1/selection", { time_ranges: [[0, 2]] });
    await app.brushEmbedding(brushRectAround(app, [0, 1]));
    const callsBefore = service.log.length;
    await app.brushEmbedding({ x0: -9, y0: -9, x1: -8, y1: -8 });
    expect(app.state.highlightedRanges).toEqual([]);
    expect(service.log.length).toBe(callsBefore);
  });

  it("series brush maps back to windows through the service (round-trip superset)", async () => {
    service.routes.set("POST /datasets/ds-1/selection", (req) => {
      const body = req.body as { window_indices?: number[]; time_range?: [number, number] };
      // canned behaviour copied from the live service for L=2, T=4
      if (body.window_indices) return { time_ranges: [[0, 2]] };
      return { window_indices: [0, 1, 2] };
    });
    await app.brushEmbedding(brushRectAround(app, [0, 1]));
    const [lo, hi] = app.state.highlightedRanges[0];
    await app.brushSeriesRange(lo, hi);
    const windows = new Set(app.state.highlightedWindows);
    expect([0, 1].every((w) => windows.has(w))).toBe(true);
    const highlightedCircles = app.embeddingsBox.querySelectorAll("circle.highlighted");
    expect(highlightedCircles.length).toBe(3);
  });

  it("selecting the final window highlights the last L samples", async () => {
    service.routes.set("POST /datasets/ds-1/selection", { time_ranges: [[2, 3]] });
    await app.brushEmbedding(brushRectAround(app, [2]));
    expect(app.state.highlightedRanges).toEqual([[2, 3]]);
  });
});

describe("compare mode", () => {
  it("shows the server's alignment residual as the badge value", async () => {
    const service = mockService();
    paperRoutes(service);
    const app = makeApp(service);
    app.state.compareMode = true;
    await loadPaper(app);

    expect(app.residualBadge.hidden).toBe(false);
    expect(app.residualBadge.dataset.value).toBe(String(paperEmbedding().alignment_residual));
    expect(app.residualBadge.textContent).toContain("alignment residual");
    // two panels, one per method
    expect(app.embeddingsBox.querySelectorAll("svg.embedding").length).toBe(2);
  });

  it("hides the badge when the companion embedding is unavailable", async () => {
    const service = mockService();
    paperRoutes(service);
    const app = makeApp(service);
    await loadPaper(app);
    expect(app.residualBadge.hidden).toBe(true);
  });

  it("split mode renders floor(r/2) panels", async () => {
    const service = mockService();
    service.routes.set("POST /datasets", { id: "ds-1", T: 4, D: 2, channel_names: null });
    const payload = paperEmbedding();
    const wide = {
      ...payload,
      r: 4,
      coords: payload.coords.map((row, i) => [...row, i * 1.0, -i * 1.0]),
    };
    service.routes.set("GET /datasets/ds-1/embedding", wide);
    const app = makeApp(service);
    app.state.splitMode = true;
    await loadPaper(app);
    expect(app.embeddingsBox.querySelectorAll("svg.embedding").length).toBe(2);
  });
});

describe("region query flow", () => {
  it("renders the service's entry step unmodified", async () => {
    const service = mockService();
    paperRoutes(service);
    service.routes.set("POST /datasets/ds-1/region-query", { steps_until_entry: 17 });
    const app = makeApp(service);
    await loadPaper(app);

    await app.runRegionQuery([0.5, -0.5], 0.25);
    const call = service.log.find((r) => r.url.endsWith("/region-query"));
    expect(call?.body).toMatchObject({ region: { center: [0.5, -0.5], radius: 0.25 }, L: 2 });
    expect(app.answerBox.dataset.value).toBe("17");
    expect(app.answerBox.textContent).toBe("next entry: 17 steps ahead");
    const label = app.seriesSvg.querySelector(".entry-marker-label");
    expect(label?.textContent).toBe("entry in 17 steps");
  });

  it("shows the no-entry notice for null answers", async () => {
    const service = mockService();
    paperRoutes(service);
    service.routes.set("POST /datasets/ds-1/region-query", { steps_until_entry: null });
    const app = makeApp(service);
    await loadPaper(app);
    await app.runRegionQuery([9.0, 9.0], 0.1);
    expect(app.answerBox.textContent).toBe("no entry within horizon");
    expect(app.seriesSvg.querySelector(".entry-marker")).toBeNull();
  });
});

describe("forecast overlay", () => {
  it("draws the service's predictions after the series end", async () => {
    const service = mockService();
    paperRoutes(service);
    service.routes.set("POST /datasets/ds-1/forecast", {
      horizon: 3,
      predicted_outputs: [
        [5.0, 50.0],
        [6.0, 60.0],
        [7.0, 70.0],
      ],
      predicted_states: [[0, 0], [0, 0], [0, 0]],
      output_covariances: [],
    });
    const app = makeApp(service);
    await loadPaper(app);
    await app.overlayForecast();
    expect(app.forecastOverlay?.length).toBe(3);
    expect(app.seriesSvg.querySelectorAll(".forecast-line").length).toBe(2);
  });
});

describe("stale responses", () => {
  it("discards an embedding answer that arrives after a newer request", async () => {
    const service = mockService();
    service.routes.set("POST /datasets", { id: "ds-1", T: 4, D: 2, channel_names: null });
    let releaseFirst: (() => void) | null = null;
    const firstBlocked = new Promise<void>((resolve) => (releaseFirst = resolve));
    let call = 0;
    service.routes.set("GET /datasets/ds-1/embedding", async () => {
      call += 1;
      if (call === 1) {
        await firstBlocked;
        return { ...paperEmbedding(), alignment_residual: 111.0 };
      }
      return { ...paperEmbedding(), alignment_residual: 222.0 };
    });
    const app = makeApp(service);
    app.state.L = 2;
    app.state.rank = 2;
    app.state.datasetId = "ds-1";
    app.state.T = 4;
    app.state.D = 2;
    app.seriesValues = [
      [1, 10],
      [2, 20],
      [3, 30],
      [4, 40],
    ];

    const first = app.refreshEmbedding();
    const second = app.refreshEmbedding();
    await second;
    releaseFirst!();
    await first;
    expect(app.state.embedding?.alignment_residual).toBe(222.0);
  });
});

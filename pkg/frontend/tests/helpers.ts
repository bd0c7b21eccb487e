// A scriptable stand-in for the timelens service: canned JSON per route,
// with a request log so tests can assert the UI asked the server instead of
// computing anything itself.

import type { FetchLike } from "../src/api.js";

export interface LoggedRequest {
  url: string;
  method: string;
  body: unknown;
}

type RouteHandler = unknown | ((req: LoggedRequest) => unknown | Promise<unknown>);

export interface MockService {
  fetch: FetchLike;
  log: LoggedRequest[];
  routes: Map<string, RouteHandler>;
}

function routeKey(method: string, url: string): string {
  const path = url.split("?")[0];
  return `${method} ${path}`;
}

export function mockService(): MockService {
  const log: LoggedRequest[] = [];
  const routes = new Map<string, RouteHandler>();
  const fetchImpl: FetchLike = async (url, init) => {
    const method = init?.method ?? "GET";
    let body: unknown = null;
    if (typeof init?.body === "string") {
      try {
        body = JSON.parse(init.body);
      } catch {
        body = init.body;
      }
    }
    const request: LoggedRequest = { url, method, body };
    log.push(request);
    const handler = routes.get(routeKey(method, url));
    if (handler === undefined) {
      return new Response(JSON.stringify({ detail: `no route for ${method} ${url}` }), { status: 404 });
    }
    const payload =
      typeof handler === "function" ? await (handler as (r: LoggedRequest) => unknown)(request) : handler;
    if (payload instanceof Response) return payload;
    return new Response(JSON.stringify(payload), {
      status: 200,
      headers: { "content-type": "application/json" },
    });
  };
  return { fetch: fetchImpl, log, routes };
}

export const PAPER_CSV = "1,10\n2,20\n3,30\n4,40\n";

/** Embedding payload shaped like the real service's answer for the paper example. */
export function paperEmbedding(method: "timecluster" | "subspace" = "timecluster") {
  return {
    L: 2,
    r: 2,
    source: method === "timecluster" ? "timecluster_pca" : "hankel_svd",
    coords: [
      [22.244857726440696, -3.1884643216463444],
      [36.22946522663438, -0.652571369346006],
      [50.21407272682807, 1.8833215829543255],
    ],
    window_start_indices: [0, 1, 2],
    singular_values: [65.79407986812093, 3.7601933869580932, 4.224292623332524e-15],
    alignment_residual: 1.0024090424784728e-15,
  };
}

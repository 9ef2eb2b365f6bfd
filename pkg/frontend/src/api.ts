import type {
  ExpressionResponse,
  Meta,
  PointsResponse,
  ReclusterResponse,
  SummariesResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly code: string,
    message: string,
    readonly status: number,
  ) {
    super(message);
  }
}

async function parse<T>(resp: Response): Promise<T> {
  const body = await resp.json();
  if (!resp.ok) {
    const err = body?.error ?? { code: "UNKNOWN", message: resp.statusText };
    throw new ApiError(err.code, err.message, resp.status);
  }
  return body as T;
}

/** Thin typed client over the session endpoints; baseUrl has no trailing slash. */
export class ApiClient {
  constructor(readonly baseUrl: string = "") {}

  meta(): Promise<Meta> {
    return fetch(`${this.baseUrl}/meta`).then((r) => parse<Meta>(r));
  }

  points(): Promise<PointsResponse> {
    return fetch(`${this.baseUrl}/points`).then((r) => parse<PointsResponse>(r));
  }

  expression(feature: string): Promise<ExpressionResponse> {
    const q = new URLSearchParams({ feature });
    return fetch(`${this.baseUrl}/expression?${q}`).then((r) =>
      parse<ExpressionResponse>(r),
    );
  }

  recluster(k: number): Promise<ReclusterResponse> {
    return fetch(`${this.baseUrl}/recluster`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ k }),
    }).then((r) => parse<ReclusterResponse>(r));
  }

  summaries(opts: {
    clusters: number[];
    cellTypes: string[];
    topN: number;
    feature?: string;
    bins?: number;
  }): Promise<SummariesResponse> {
    const q = new URLSearchParams({
      clusters: opts.clusters.join(","),
      cell_types: opts.cellTypes.join(","),
      top_n: String(opts.topN),
    });
    if (opts.feature) q.set("feature", opts.feature);
    if (opts.bins) q.set("bins", String(opts.bins));
    return fetch(`${this.baseUrl}/summaries?${q}`).then((r) =>
      parse<SummariesResponse>(r),
    );
  }
}

// Typed client for the bounds service. The fetch function is injectable so
// tests can drive the client with canned responses.

export type IntervalPair = [number, number];

export interface UnivariateRow {
  setting: string;
  estimate: number;
  original_lower: number;
  original_upper: number;
  new_lower: number | null;
  new_upper: number | null;
}

export interface ModelResponse {
  snapshot: string;
  feasible: boolean;
  settings: string[];
  univariate_table: UnivariateRow[];
  audits: {
    feasible: boolean;
    transitivity_violations: unknown[];
  };
}

export interface PinResponse {
  setting: string;
  pinned_value: number;
  feasible: boolean;
  conditional: Record<string, IntervalPair> | null;
  snapshot: string;
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(detail);
  }
}

async function parse<T>(resp: Response): Promise<T> {
  if (!resp.ok) {
    let detail = `request failed with status ${resp.status}`;
    try {
      const body = (await resp.json()) as { detail?: string };
      if (body.detail) detail = body.detail;
    } catch {
      // non-JSON error body; keep the generic message
    }
    throw new ApiError(resp.status, detail);
  }
  return (await resp.json()) as T;
}

export class ApiClient {
  constructor(
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
    private readonly base = "",
  ) {}

  getModel(snapshot?: string): Promise<ModelResponse> {
    const query = snapshot ? `?snapshot=${encodeURIComponent(snapshot)}` : "";
    return this.fetchFn(`${this.base}/api/model${query}`).then((r) => parse<ModelResponse>(r));
  }

  pin(setting: string, value: number, snapshot?: string): Promise<PinResponse> {
    return this.fetchFn(`${this.base}/api/pin`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ setting, value, snapshot }),
    }).then((r) => parse<PinResponse>(r));
  }
}

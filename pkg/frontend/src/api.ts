import type {
  ApiError,
  Catalog,
  Profile,
  Recommendation,
  RunHandle,
  WhatIfResult,
} from "./types.js";

export class ServiceError extends Error {
  constructor(
    public readonly status: number,
    public readonly payload: ApiError,
  ) {
    super(payload.message || `service error ${status}`);
  }
}

export type FetchFn = typeof fetch;

/**
 * Thin client for the decision service. The UI never computes a
 * recommendation locally: everything displayed comes back from here.
 */
export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchFn = fetch,
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const resp = await this.fetchFn(`${this.baseUrl}${path}`, {
      method,
      headers: body !== undefined ? { "Content-Type": "application/json" } : undefined,
      body: body !== undefined ? JSON.stringify(body) : undefined,
    });
    const payload = await resp.json();
    if (!resp.ok) {
      throw new ServiceError(resp.status, payload as ApiError);
    }
    return payload as T;
  }

  getCatalog(): Promise<Catalog> {
    return this.request("GET", "/v1/catalog");
  }

  recommend(profile: Profile): Promise<Recommendation> {
    return this.request("POST", "/v1/recommend", profile);
  }

  whatIf(profile: Profile, delta: Record<string, unknown>): Promise<WhatIfResult> {
    return this.request("POST", "/v1/whatif", { profile, delta });
  }

  startSimulation(config: Record<string, unknown>): Promise<RunHandle> {
    return this.request("POST", "/v1/simulations", config);
  }

  getRun(runId: string): Promise<RunHandle> {
    return this.request("GET", `/v1/simulations/${runId}`);
  }

  /** Poll a run handle until it leaves the queue (default cadence 500 ms). */
  async pollRun(runId: string, intervalMs = 500, timeoutMs = 120_000): Promise<RunHandle> {
    const deadline = Date.now() + timeoutMs;
    for (;;) {
      const handle = await this.getRun(runId);
      if (handle.status === "done" || handle.status === "failed") {
        return handle;
      }
      if (Date.now() > deadline) {
        throw new Error(`run ${runId} did not finish within ${timeoutMs} ms`);
      }
      await new Promise((resolve) => setTimeout(resolve, intervalMs));
    }
  }
}

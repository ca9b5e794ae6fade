/** Thin typed HTTP client; every console feature goes through these calls. */

import type {
  EpochEvent,
  InjectReceipt,
  IntentReceipt,
  KpiRow,
  StatusResponse,
  Timeline,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: unknown,
  ) {
    super(`api error ${status}: ${JSON.stringify(detail)}`);
  }
}

export interface InjectParams {
  kind: string;
  magnitude: number;
  at_step: number;
  duration: number;
  target_slice?: number | null;
}

export class ApiClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers: body === undefined ? undefined : { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = await response.json();
    if (!response.ok) {
      throw new ApiError(response.status, payload.detail ?? payload);
    }
    return payload as T;
  }

  status(): Promise<StatusResponse> {
    return this.request("GET", "/status");
  }

  submitIntent(text: string): Promise<IntentReceipt> {
    return this.request("POST", "/intent", { text });
  }

  inject(params: InjectParams): Promise<InjectReceipt> {
    return this.request("POST", "/inject", params);
  }

  async advance(epochs: number): Promise<EpochEvent[]> {
    const body = await this.request<{ events: EpochEvent[] }>("POST", "/advance", { epochs });
    return body.events;
  }

  pause(): Promise<{ paused: boolean }> {
    return this.request("POST", "/pause");
  }

  resume(): Promise<{ paused: boolean }> {
    return this.request("POST", "/resume");
  }

  async kpis(limit = 2000): Promise<KpiRow[]> {
    const body = await this.request<{ rows: KpiRow[] }>("GET", `/kpis?limit=${limit}`);
    return body.rows;
  }

  async events(limit = 2000): Promise<EpochEvent[]> {
    const body = await this.request<{ events: EpochEvent[] }>("GET", `/events?limit=${limit}`);
    return body.events;
  }

  serverTimeline(limit = 2000): Promise<Timeline> {
    return this.request("GET", `/timeline?limit=${limit}`);
  }
}

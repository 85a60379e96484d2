/** Typed client for the gateway's v1 API. */

import type {
  Catalogue,
  ComposeResult,
  InsStatus,
  StreamBatch,
  TopologyView,
} from "./types.js";

export class ApiError extends Error {
  code: string;
  violatedConstraint?: string;
  status: number;

  constructor(status: number, code: string, message: string, constraint?: string) {
    super(message);
    this.status = status;
    this.code = code;
    this.violatedConstraint = constraint;
  }
}

export class GatewayClient {
  base: string;

  constructor(base = "") {
    this.base = base.replace(/\/$/, "");
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await fetch(`${this.base}${path}`, {
      method,
      headers: body === undefined ? {} : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const data = await response.json();
    if (!response.ok) {
      throw new ApiError(
        response.status,
        data.code ?? "error",
        data.message ?? response.statusText,
        data.violated_constraint,
      );
    }
    return data as T;
  }

  session(): Promise<{ run_id: string; mode: string; sim_time_s: number; n_events: number }> {
    return this.request("GET", "/v1/session");
  }

  resetSession(seed = 0): Promise<unknown> {
    return this.request("POST", "/v1/session/reset", { seed });
  }

  registerIsland(name: string, certificateId: string, catalogue: unknown[]): Promise<{ island_id: number }> {
    return this.request("POST", "/v1/islands", {
      name,
      certificate_id: certificateId,
      catalogue,
    });
  }

  catalogue(): Promise<{ islands: Catalogue }> {
    return this.request("GET", "/v1/catalogue");
  }

  compose(payload: unknown): Promise<ComposeResult> {
    return this.request("POST", "/v1/ins", payload);
  }

  deploy(insId: string): Promise<InsStatus> {
    return this.request("POST", `/v1/ins/${insId}/deploy`);
  }

  reconfigure(insId: string, change: Record<string, unknown>): Promise<InsStatus> {
    return this.request("POST", `/v1/ins/${insId}/reconfigure`, change);
  }

  terminate(insId: string): Promise<InsStatus> {
    return this.request("DELETE", `/v1/ins/${insId}`);
  }

  status(insId: string): Promise<InsStatus> {
    return this.request("GET", `/v1/ins/${insId}`);
  }

  services(): Promise<{ services: InsStatus[] }> {
    return this.request("GET", "/v1/ins");
  }

  stream(since: number, waitS = 5): Promise<StreamBatch> {
    return this.request("GET", `/v1/stream?since=${since}&wait_s=${waitS}`);
  }

  topology(): Promise<TopologyView> {
    return this.request("GET", "/v1/topology");
  }

  scenarios(): Promise<{ scenarios: string[] }> {
    return this.request("GET", "/v1/scenarios");
  }

  runScenario(name: string, seed = 0): Promise<unknown> {
    return this.request("POST", `/v1/run/${name}`, { seed });
  }
}

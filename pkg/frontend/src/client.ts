/** Thin JSON client for the inference service. */

import type {
  MeasureResponse,
  ModelInfo,
  RefineRequest,
  RefineResponse,
} from "./types";

export type FetchLike = (
  url: string,
  init?: RequestInit,
) => Promise<Response>;

/** A non-2xx service response, carrying its status and detail message. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`service returned ${status}: ${detail}`);
  }
}

async function raiseForStatus(resp: Response): Promise<void> {
  if (resp.ok) return;
  let detail = resp.statusText || `HTTP ${resp.status}`;
  try {
    const body = await resp.json();
    if (body && typeof body.detail === "string") detail = body.detail;
    else if (body && body.detail) detail = JSON.stringify(body.detail);
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(resp.status, detail);
}

export class ServiceClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  private async post<T>(path: string, body: unknown, signal?: AbortSignal): Promise<T> {
    const resp = await this.fetchImpl(this.baseUrl + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
      signal,
    });
    await raiseForStatus(resp);
    return (await resp.json()) as T;
  }

  async listModels(): Promise<ModelInfo[]> {
    const resp = await this.fetchImpl(this.baseUrl + "/v1/models");
    await raiseForStatus(resp);
    const body = (await resp.json()) as { models: ModelInfo[] };
    return body.models;
  }

  async measure(
    modelId: string,
    series: number[],
    signal?: AbortSignal,
  ): Promise<MeasureResponse> {
    return this.post("/v1/measure", { model_id: modelId, series }, signal);
  }

  async refine(req: RefineRequest, signal?: AbortSignal): Promise<RefineResponse> {
    return this.post("/v1/refine", req, signal);
  }
}

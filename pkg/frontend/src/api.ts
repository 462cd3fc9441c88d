/** Thin typed client for the cube service HTTP API.
 *
 * The fetch implementation is injected so tests can run without a browser
 * or a live server.  Every method throws ApiError on a non-2xx status and
 * never retries; callers decide how to surface failures.
 */

import type {
  BuildRequestWire,
  HistogramWire,
  InfoWire,
  LineageWire,
  PickRequestWire,
  PickResultWire,
  RenderRequestWire,
  StatusWire,
} from "./wire.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

/** What the controller needs from the service; tests swap in fakes. */
export interface Api {
  info(): Promise<InfoWire>;
  buildStc(req: BuildRequestWire): Promise<string>;
  stcStatus(stcId: string): Promise<StatusWire>;
  render(req: RenderRequestWire): Promise<Blob>;
  pick(req: PickRequestWire): Promise<PickResultWire | null>;
  lineage(id: number): Promise<LineageWire>;
  divisionHistogram(): Promise<HistogramWire>;
}

async function fail(res: Response): Promise<never> {
  let detail = res.statusText;
  try {
    const body = await res.json();
    if (body && typeof body.detail === "string") detail = body.detail;
  } catch {
    // non-JSON error body, keep the status text
  }
  throw new ApiError(res.status, detail);
}

export class ApiClient implements Api {
  constructor(
    private readonly base: string = "",
    private readonly fetchImpl: FetchLike = (i, o) => fetch(i, o),
  ) {}

  private async getJson<T>(path: string): Promise<T> {
    const res = await this.fetchImpl(this.base + path);
    if (!res.ok) await fail(res);
    return (await res.json()) as T;
  }

  private async postJson(path: string, body: unknown): Promise<Response> {
    const res = await this.fetchImpl(this.base + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!res.ok) await fail(res);
    return res;
  }

  info(): Promise<InfoWire> {
    return this.getJson("/api/info");
  }

  async buildStc(req: BuildRequestWire): Promise<string> {
    const res = await this.postJson("/api/stc", req);
    const body = (await res.json()) as { stc_id: string };
    return body.stc_id;
  }

  stcStatus(stcId: string): Promise<StatusWire> {
    return this.getJson(`/api/stc/${stcId}/status`);
  }

  async render(req: RenderRequestWire): Promise<Blob> {
    const res = await this.postJson("/api/render", req);
    return res.blob();
  }

  async pick(req: PickRequestWire): Promise<PickResultWire | null> {
    const res = await this.postJson("/api/pick", req);
    return (await res.json()) as PickResultWire | null;
  }

  lineage(id: number): Promise<LineageWire> {
    return this.getJson(`/api/lineage/${id}`);
  }

  divisionHistogram(): Promise<HistogramWire> {
    return this.getJson("/api/histogram/divisions");
  }
}

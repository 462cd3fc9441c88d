import { describe, expect, it } from "vitest";

import { ApiClient, ApiError, FetchLike } from "../src/api.js";
import { freshSession, toWire } from "../src/session.js";
import type { CameraWire, RenderRequestWire } from "../src/wire.js";

interface Call {
  url: string;
  method: string;
  headers: Record<string, string>;
  body: unknown;
}

function capture(responder: (url: string) => Response) {
  const calls: Call[] = [];
  const fetchImpl: FetchLike = async (url, init) => {
    calls.push({
      url,
      method: init?.method ?? "GET",
      headers: (init?.headers as Record<string, string>) ?? {},
      body: init?.body ? JSON.parse(init.body as string) : undefined,
    });
    return responder(url);
  };
  return { calls, fetchImpl };
}

const json = (body: unknown, status = 200) =>
  new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });

const CAMERA: CameraWire = {
  position: [32, 32, -100],
  view_dir: [0, 0, 1],
  up: [0, 1, 0],
  width: 96,
  height: 96,
  mode: "orthographic",
  ortho_half_height: 50,
  fov_y_deg: 45,
};

describe("api client", () => {
  it("posts cube builds with the exact wire body", async () => {
    const { calls, fetchImpl } = capture(() => json({ stc_id: "abc" }));
    const api = new ApiClient("http://host", fetchImpl);
    const id = await api.buildStc({
      plane: { origin: [50, 50, 0], normal: [0, 0, 1] },
      resolution: 128,
      t_range: [0, 10],
    });
    expect(id).toBe("abc");
    expect(calls[0].url).toBe("http://host/api/stc");
    expect(calls[0].method).toBe("POST");
    expect(calls[0].headers["Content-Type"]).toBe("application/json");
    expect(calls[0].body).toEqual({
      plane: { origin: [50, 50, 0], normal: [0, 0, 1] },
      resolution: 128,
      t_range: [0, 10],
    });
  });

  it("sends render requests with only known fields", async () => {
    const { calls, fetchImpl } = capture(
      () => new Response(new Blob([new Uint8Array([1])]), { status: 200 }),
    );
    const api = new ApiClient("", fetchImpl);
    const req: RenderRequestWire = {
      view: "stc",
      stc_id: "abc",
      time: null,
      camera: CAMERA,
      style: { light_pos: [32, 32, -100] },
      session: toWire(freshSession()),
      overlay: false,
    };
    const blob = await api.render(req);
    expect(blob.size).toBeGreaterThan(0);
    expect(calls[0].url).toBe("/api/render");
    // the server rejects unknown fields, so the body must carry exactly these
    expect(Object.keys(calls[0].body as object).sort()).toEqual([
      "camera", "overlay", "session", "stc_id", "style", "time", "view",
    ]);
    expect(
      Object.keys((calls[0].body as { camera: object }).camera).sort(),
    ).toEqual([
      "fov_y_deg", "height", "mode", "ortho_half_height",
      "position", "up", "view_dir", "width",
    ]);
  });

  it("routes status, lineage and histogram reads", async () => {
    const { calls, fetchImpl } = capture((url) => {
      if (url.endsWith("/status")) {
        return json({ stc_id: "abc", state: "building" });
      }
      if (url.includes("/lineage/")) {
        return json({ id: 4, members: [[4, 0]], ids: [4] });
      }
      return json({ histogram: [[3, 2]] });
    });
    const api = new ApiClient("", fetchImpl);
    expect((await api.stcStatus("abc")).state).toBe("building");
    expect((await api.lineage(4)).ids).toEqual([4]);
    expect((await api.divisionHistogram()).histogram).toEqual([[3, 2]]);
    expect(calls.map((c) => c.url)).toEqual([
      "/api/stc/abc/status",
      "/api/lineage/4",
      "/api/histogram/divisions",
    ]);
    expect(calls.every((c) => c.method === "GET")).toBe(true);
  });

  it("returns null for a pick that hits nothing", async () => {
    const { fetchImpl } = capture(() => json(null));
    const api = new ApiClient("", fetchImpl);
    const hit = await api.pick({
      view: "mesh",
      stc_id: null,
      time: 2,
      camera: CAMERA,
      pixel: [10, 20],
      session: toWire(freshSession()),
    });
    expect(hit).toBeNull();
  });

  it("surfaces server errors with their status and detail", async () => {
    const { fetchImpl } = capture(() =>
      json({ detail: "stc 'abc' is still building" }, 409),
    );
    const api = new ApiClient("", fetchImpl);
    const err = await api.stcStatus("abc").catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect((err as ApiError).status).toBe(409);
    expect((err as ApiError).message).toContain("still building");
  });
});

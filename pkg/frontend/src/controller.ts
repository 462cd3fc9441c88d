/** UI logic with no DOM dependency.
 *
 * The controller owns the session, the two orbit cameras, and one render
 * gate per view.  It never decides visibility itself: every control change
 * edits the session and ships the whole thing to the server, so the images
 * that come back are the single source of truth.  Outputs go through the
 * injected sinks, which keeps the whole thing testable under node.
 */

import type { Api } from "./api.js";
import { Orbit, cursorOutline, orbitCamera } from "./camera.js";
import { RenderGate } from "./coalesce.js";
import {
  Session,
  applyState,
  freshSession,
  nextState,
  setCategoryFilter,
  setTimeCursor,
  setTimeWindow,
  setValueFilter,
  toWire,
} from "./session.js";
import type {
  InfoWire,
  PickRequestWire,
  PickResultWire,
  RenderRequestWire,
  StatusWire,
  Vec3,
  ViewName,
} from "./wire.js";

export interface Sinks {
  setImage(view: ViewName, blob: Blob): void;
  /** Time cursor marker over the cube image; null hides it. */
  setCursorOutline(points: [number, number][] | null): void;
  setBanner(message: string | null): void;
  setSummary(result: PickResultWire | null): void;
  setBuildState(state: "idle" | "building" | "failed", detail?: string): void;
}

export interface ControllerOptions {
  viewWidth?: number;
  viewHeight?: number;
  /** Poll interval while a cube build runs, injectable for tests. */
  pollDelay?: (ms: number) => Promise<void>;
  pollMs?: number;
}

const sleep = (ms: number) => new Promise<void>((r) => setTimeout(r, ms));

export class Controller {
  readonly session: Session = freshSession();
  info: InfoWire | null = null;

  stcId: string | null = null;
  stcShape: [number, number, number] | null = null;
  timeMap: number[] = [];

  plane = { origin: [0, 0, 0] as Vec3, normal: [0, 0, 1] as Vec3, resolution: 256 };

  stcOrbit: Orbit = {
    center: [0, 0, 0], azimuthDeg: -120, elevationDeg: 25,
    distance: 400, halfHeight: 90,
  };
  meshOrbit: Orbit = {
    center: [0, 0, 0], azimuthDeg: -90, elevationDeg: 90,
    distance: 300, halfHeight: 80,
  };

  private readonly gates: Record<ViewName, RenderGate> = {
    stc: new RenderGate(),
    mesh: new RenderGate(),
  };
  private readonly width: number;
  private readonly height: number;
  private readonly delay: (ms: number) => Promise<void>;
  private readonly pollMs: number;

  constructor(
    private readonly api: Api,
    private readonly sinks: Sinks,
    opts: ControllerOptions = {},
  ) {
    this.width = opts.viewWidth ?? 512;
    this.height = opts.viewHeight ?? 512;
    this.delay = opts.pollDelay ?? sleep;
    this.pollMs = opts.pollMs ?? 500;
  }

  gate(view: ViewName): RenderGate {
    return this.gates[view];
  }

  get timeRange(): [number, number] {
    return this.info ? this.info.time_range : [0, 0];
  }

  async start(): Promise<void> {
    this.info = await this.api.info();
    this.session.timeCursor = this.info.time_range[0];
  }

  // ---- controls ----------------------------------------------------------

  onTimeCursor(t: number): void {
    setTimeCursor(this.session, t, this.timeRange);
    this.requestRenders();
  }

  onTimeWindow(a: number | null, b = 0): void {
    setTimeWindow(this.session, a, b, this.timeRange);
    this.requestRenders();
  }

  onValueFilter(lo: number | null, hi?: number): void {
    setValueFilter(this.session, lo, hi);
    this.requestRenders();
  }

  onProperty(name: string | null): void {
    this.session.activeProperty = name;
    this.requestRenders();
  }

  onGradient(name: string): void {
    this.session.activeGradient = name;
    this.requestRenders();
  }

  onCategoryFilter(labels: string[] | null): void {
    setCategoryFilter(this.session, labels);
    this.requestRenders();
  }

  onOrbit(view: ViewName, dAzimuth: number, dElevation: number): void {
    const o = view === "stc" ? this.stcOrbit : this.meshOrbit;
    o.azimuthDeg += dAzimuth;
    o.elevationDeg = Math.max(-89, Math.min(89, o.elevationDeg + dElevation));
    this.requestRenders([view]);
  }

  onZoom(view: ViewName, factor: number): void {
    const o = view === "stc" ? this.stcOrbit : this.meshOrbit;
    o.halfHeight = Math.max(1, o.halfHeight * factor);
    this.requestRenders([view]);
  }

  // ---- picking -----------------------------------------------------------

  async onClick(view: ViewName, pixel: [number, number]): Promise<void> {
    let hit: PickResultWire | null;
    try {
      hit = await this.api.pick(this.pickBody(view, pixel));
    } catch (err) {
      this.sinks.setBanner(`pick failed: ${message(err)}`);
      return;
    }
    this.sinks.setSummary(hit);
    if (hit === null) return;
    // one click drives the whole lineage through the same state cycle
    const state = nextState(this.session, hit.id);
    let ids = [hit.id];
    try {
      const lin = await this.api.lineage(hit.id);
      ids = lin.ids;
    } catch (err) {
      this.sinks.setBanner(`lineage lookup failed: ${message(err)}`);
    }
    applyState(this.session, ids, state);
    this.requestRenders();
  }

  // ---- cube builds -------------------------------------------------------

  setPlanePreset(axis: "x" | "y" | "z"): void {
    this.plane.normal =
      axis === "x" ? [1, 0, 0] : axis === "y" ? [0, 1, 0] : [0, 0, 1];
  }

  /** Post the current plane, poll until done, then swap both views over. */
  async buildPlane(): Promise<void> {
    this.sinks.setBuildState("building");
    let id: string;
    try {
      id = await this.api.buildStc({
        plane: { origin: [...this.plane.origin], normal: [...this.plane.normal] },
        resolution: this.plane.resolution,
        t_range: null,
      });
    } catch (err) {
      this.sinks.setBuildState("failed", message(err));
      this.sinks.setBanner(`cube build failed: ${message(err)}`);
      return;
    }
    let status: StatusWire;
    try {
      status = await this.api.stcStatus(id);
      while (status.state === "building") {
        await this.delay(this.pollMs);
        status = await this.api.stcStatus(id);
      }
    } catch (err) {
      this.sinks.setBuildState("failed", message(err));
      this.sinks.setBanner(`cube build failed: ${message(err)}`);
      return;
    }
    if (status.state === "failed") {
      this.sinks.setBuildState("failed", status.error ?? "build failed");
      this.sinks.setBanner(`cube build failed: ${status.error ?? "unknown"}`);
      return;
    }
    this.stcId = id;
    this.stcShape = status.shape ?? null;
    this.timeMap = status.time_map ?? [];
    if (this.stcShape) {
      const [w, h, d] = this.stcShape;
      this.stcOrbit.center = [w / 2, h / 2, d / 2];
      this.stcOrbit.distance = 2 * Math.max(w, h, d);
      this.stcOrbit.halfHeight = 0.75 * Math.max(w, h, d);
    }
    this.meshOrbit.center = [...this.plane.origin];
    this.sinks.setBuildState("idle");
    this.requestRenders();
  }

  // ---- rendering ---------------------------------------------------------

  /** Schedule one coalesced render per view; bursts collapse in the gates. */
  requestRenders(views: ViewName[] = ["stc", "mesh"]): void {
    for (const view of views) {
      if (view === "stc" && this.stcId === null) continue;
      this.gates[view].schedule(() => this.renderOnce(view));
    }
  }

  renderBody(view: ViewName): RenderRequestWire {
    const cam = orbitCamera(
      view === "stc" ? this.stcOrbit : this.meshOrbit, this.width, this.height,
    );
    return {
      view,
      stc_id: this.stcId,
      time: view === "mesh" ? this.session.timeCursor : null,
      camera: cam,
      style: { light_pos: [...cam.position] },
      session: toWire(this.session),
      overlay: view === "mesh" && this.stcId !== null,
    };
  }

  private async renderOnce(view: ViewName): Promise<void> {
    const body = this.renderBody(view);
    let blob: Blob;
    try {
      blob = await this.api.render(body);
    } catch (err) {
      // keep the stale image on screen, just raise the banner
      this.sinks.setBanner(`render failed: ${message(err)}`);
      return;
    }
    this.sinks.setBanner(null);
    this.sinks.setImage(view, blob);
    if (view === "stc") this.updateCursorOverlay(body);
  }

  private updateCursorOverlay(body: RenderRequestWire): void {
    if (!this.stcShape || this.timeMap.length === 0) {
      this.sinks.setCursorOutline(null);
      return;
    }
    const depth = nearestDepth(this.timeMap, this.session.timeCursor);
    this.sinks.setCursorOutline(
      cursorOutline(body.camera, this.stcShape, depth),
    );
  }

  private pickBody(view: ViewName, pixel: [number, number]): PickRequestWire {
    return {
      view,
      stc_id: this.stcId,
      time: view === "mesh" ? this.session.timeCursor : null,
      camera: orbitCamera(
        view === "stc" ? this.stcOrbit : this.meshOrbit, this.width, this.height,
      ),
      pixel,
      session: toWire(this.session),
    };
  }
}

function nearestDepth(timeMap: number[], t: number): number {
  let best = 0;
  for (let k = 1; k < timeMap.length; k++) {
    if (Math.abs(timeMap[k] - t) < Math.abs(timeMap[best] - t)) best = k;
  }
  return best;
}

function message(err: unknown): string {
  return err instanceof Error ? err.message : String(err);
}

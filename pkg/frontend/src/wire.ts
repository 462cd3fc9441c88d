/** Request and response shapes of the HTTP API, mirrored field for field.
 *
 * The server rejects unknown fields, so these interfaces are exhaustive:
 * adding a field here without server support breaks requests loudly.
 */

export type Vec3 = [number, number, number];

export interface PlaneWire {
  origin: Vec3;
  normal: Vec3;
}

export interface BuildRequestWire {
  plane: PlaneWire;
  resolution: number;
  t_range: [number, number] | null;
}

export interface CameraWire {
  position: Vec3;
  view_dir: Vec3;
  up: Vec3;
  width: number;
  height: number;
  mode: "orthographic" | "perspective";
  ortho_half_height: number;
  fov_y_deg: number;
}

export interface StyleWire {
  light_pos: Vec3;
}

export type ObjectStateWire = "normal" | "highlighted" | "masked";

export interface SessionWire {
  value_filter: [number, number] | null;
  time_window: [number, number] | null;
  time_cursor: number;
  object_states: Record<string, ObjectStateWire>;
  active_property: string | null;
  active_gradient: string;
  category_filter: string[] | null;
}

export type ViewName = "stc" | "mesh";

export interface RenderRequestWire {
  view: ViewName;
  stc_id: string | null;
  time: number | null;
  camera: CameraWire;
  style: StyleWire;
  session: SessionWire;
  overlay: boolean;
}

export interface PickRequestWire {
  view: ViewName;
  stc_id: string | null;
  time: number | null;
  camera: CameraWire;
  pixel: [number, number];
  session: SessionWire;
}

export interface InfoWire {
  name: string;
  units: string;
  time_range: [number, number];
  object_counts: Record<string, number>;
  properties: { name: string; kind: string }[];
  gradients: string[];
  max_id: number;
}

export interface StatusWire {
  stc_id: string;
  state: "building" | "ready" | "failed";
  // present only once ready; shape is [width, height, depth]
  shape?: [number, number, number];
  time_map?: number[];
  error?: string;
}

export interface PickSummaryWire {
  properties: Record<string, number | string | null>;
  lifespan: { steps: number; censored: boolean } | null;
}

export interface PickResultWire {
  id: number;
  t: number;
  summary: PickSummaryWire;
}

export interface LineageWire {
  id: number;
  members: [number, number][];
  ids: number[];
}

export interface HistogramWire {
  histogram: [number, number][];
}

/** Orbit camera state and the projection math shared with the server.
 *
 * The server shoots orthographic rays through pixel centers: basis f =
 * normalized view direction, r = normalize(f x up), u = r x f, and pixel
 * (col, row) maps to origin pos + ndcX * hw * r + ndcY * hh * u with
 * hw = hh * width / height.  `project` inverts that mapping so the client
 * can draw overlays in exactly the server's pixel frame.
 */

import type { CameraWire, Vec3 } from "./wire.js";

export interface Orbit {
  center: Vec3;
  azimuthDeg: number;
  elevationDeg: number;
  distance: number;
  halfHeight: number;
}

const rad = (d: number) => (d * Math.PI) / 180;

const sub = (a: Vec3, b: Vec3): Vec3 => [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
const dot = (a: Vec3, b: Vec3) => a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
const cross = (a: Vec3, b: Vec3): Vec3 => [
  a[1] * b[2] - a[2] * b[1],
  a[2] * b[0] - a[0] * b[2],
  a[0] * b[1] - a[1] * b[0],
];
const norm = (a: Vec3) => Math.sqrt(dot(a, a));
const unit = (a: Vec3): Vec3 => {
  const n = norm(a);
  return [a[0] / n, a[1] / n, a[2] / n];
};

export function orbitCamera(o: Orbit, width: number, height: number): CameraWire {
  const az = rad(o.azimuthDeg);
  const el = rad(o.elevationDeg);
  const offset: Vec3 = [
    Math.cos(el) * Math.cos(az) * o.distance,
    Math.cos(el) * Math.sin(az) * o.distance,
    Math.sin(el) * o.distance,
  ];
  const position: Vec3 = [
    o.center[0] + offset[0],
    o.center[1] + offset[1],
    o.center[2] + offset[2],
  ];
  const viewDir = unit(sub(o.center, position));
  // fall back near the poles where +z is parallel to the view
  const up: Vec3 = Math.abs(viewDir[2]) < 0.9 ? [0, 0, 1] : [0, 1, 0];
  return {
    position,
    view_dir: viewDir,
    up,
    width,
    height,
    mode: "orthographic",
    ortho_half_height: o.halfHeight,
    fov_y_deg: 45.0,
  };
}

/** World point to continuous (col, row) in the camera's image. */
export function project(cam: CameraWire, p: Vec3): [number, number] {
  const f = unit(cam.view_dir);
  const r = unit(cross(f, cam.up));
  const u = cross(r, f);
  const d = sub(p, cam.position);
  const hh = cam.ortho_half_height;
  const hw = (hh * cam.width) / cam.height;
  const ndcX = dot(d, r) / hw;
  const ndcY = dot(d, u) / hh;
  const col = ((ndcX + 1) / 2) * cam.width - 0.5;
  const row = ((1 - ndcY) / 2) * cam.height - 0.5;
  return [col, row];
}

/** Corner outline of the volume's cross-section at one depth, in image
 * pixels: the client-side time cursor line over the cube view. */
export function cursorOutline(
  cam: CameraWire, shape: [number, number, number], depth: number,
): [number, number][] {
  const [w, h] = shape;
  const z = depth + 0.5;
  const corners: Vec3[] = [
    [0, 0, z],
    [w, 0, z],
    [w, h, z],
    [0, h, z],
  ];
  return corners.map((c) => project(cam, c));
}

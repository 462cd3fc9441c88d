import { describe, expect, it } from "vitest";

import { cursorOutline, orbitCamera, project } from "../src/camera.js";
import type { CameraWire } from "../src/wire.js";

const DOWN_Z: CameraWire = {
  position: [5, 5, 100],
  view_dir: [0, 0, -1],
  up: [0, 1, 0],
  width: 100,
  height: 100,
  mode: "orthographic",
  ortho_half_height: 10,
  fov_y_deg: 45,
};

describe("orbit camera", () => {
  it("looks at the orbit center", () => {
    const cam = orbitCamera(
      { center: [10, 20, 30], azimuthDeg: 40, elevationDeg: 25,
        distance: 100, halfHeight: 50 },
      512, 512,
    );
    const toCenter = [
      10 - cam.position[0], 20 - cam.position[1], 30 - cam.position[2],
    ];
    const len = Math.hypot(...toCenter);
    expect(len).toBeCloseTo(100, 6);
    for (let i = 0; i < 3; i++) {
      expect(cam.view_dir[i]).toBeCloseTo(toCenter[i] / len, 6);
    }
  });

  it("projects the center to the middle pixel", () => {
    const cam = orbitCamera(
      { center: [10, 20, 30], azimuthDeg: -60, elevationDeg: 35,
        distance: 80, halfHeight: 40 },
      512, 512,
    );
    const [col, row] = project(cam, [10, 20, 30]);
    expect(col).toBeCloseTo(255.5, 4);
    expect(row).toBeCloseTo(255.5, 4);
  });
});

describe("projection", () => {
  it("matches the server pixel convention for a straight-down view", () => {
    // +x goes right, +y goes up in the image, half extent 10 world units
    const [c0, r0] = project(DOWN_Z, [5, 5, 0]);
    expect(c0).toBeCloseTo(49.5, 6);
    expect(r0).toBeCloseTo(49.5, 6);
    const [c1, r1] = project(DOWN_Z, [10, 10, 0]);
    expect(c1).toBeCloseTo(74.5, 6);
    expect(r1).toBeCloseTo(24.5, 6);
  });

  it("outlines the cursor depth rectangle", () => {
    const pts = cursorOutline(DOWN_Z, [10, 10, 4], 1);
    expect(pts).toHaveLength(4);
    const [a, b, c, d] = pts;
    expect(a[0]).toBeCloseTo(24.5, 6);
    expect(a[1]).toBeCloseTo(74.5, 6);
    expect(b[0]).toBeCloseTo(74.5, 6);
    expect(b[1]).toBeCloseTo(74.5, 6);
    expect(c[0]).toBeCloseTo(74.5, 6);
    expect(c[1]).toBeCloseTo(24.5, 6);
    expect(d[0]).toBeCloseTo(24.5, 6);
    expect(d[1]).toBeCloseTo(24.5, 6);
  });

  it("moves with the cursor depth when seen from the side", () => {
    const side: CameraWire = {
      ...DOWN_Z,
      position: [100, 5, 2],
      view_dir: [-1, 0, 0],
      up: [0, 0, 1],
    };
    const low = cursorOutline(side, [10, 10, 4], 0);
    const high = cursorOutline(side, [10, 10, 4], 3);
    // z maps to the vertical image axis; a deeper cursor sits higher
    expect(high[0][1]).toBeLessThan(low[0][1]);
  });
});

"""Pure-numpy fallback implementations of the hot kernels.

Every function here has a compiled twin in ``_core.pyx`` with the same
signature and bit-identical output; ``stcube.kernels`` picks one at import.
Pixel conventions shared by both backends:

- pixel center of column ``c`` sits at ``x0 + (c + 0.5) * pitch``
- an even-odd crossing at x toggles pixels whose center is strictly right of x
- scanline crossings use the half-open rule ``min(ya, yb) <= cy < max(ya, yb)``
"""

from __future__ import annotations

import numpy as np


def fill_polygon(
    ids: np.ndarray,
    object_id: int,
    vx: np.ndarray,
    vy: np.ndarray,
    starts: np.ndarray,
    x0: float,
    y0: float,
    pitch: float,
) -> None:
    """Even-odd fill of one object's loops into an ID image, claiming empty pixels.

    ``ids`` is (H, W) uint32, modified in place: pixels whose center lies inside
    the union of loops (even-odd parity) and that still hold 0 receive
    ``object_id``.  ``vx``/``vy`` hold loop vertices back to back, ``starts``
    gives the offset of each loop (len = n_loops + 1).
    """
    height, width = ids.shape
    if len(vx) == 0:
        return
    ymin = float(vy.min())
    ymax = float(vy.max())
    xmin = float(vx.min())
    xmax = float(vx.max())
    r0 = int(np.ceil((ymin - y0) / pitch - 0.5))
    r1 = int(np.ceil((ymax - y0) / pitch - 0.5))
    r0 = max(r0, 0)
    r1 = min(r1, height)
    if r1 <= r0:
        return
    c0 = int(np.floor((xmin - x0) / pitch - 0.5)) + 1
    c1 = int(np.floor((xmax - x0) / pitch - 0.5)) + 1
    c0 = max(c0, 0)
    c1 = min(c1, width)
    if c1 <= c0:
        return

    cw = c1 - c0
    toggle = np.zeros((r1 - r0, cw + 1), dtype=np.int32)
    for li in range(len(starts) - 1):
        a = starts[li]
        b = starts[li + 1]
        n = b - a
        if n < 3:
            continue
        lx = vx[a:b]
        ly = vy[a:b]
        nx = np.roll(lx, -1)
        ny = np.roll(ly, -1)
        for xa, ya, xb, yb in zip(lx, ly, nx, ny):
            if ya == yb:
                continue
            lo, hi = (ya, yb) if ya < yb else (yb, ya)
            er0 = max(int(np.ceil((lo - y0) / pitch - 0.5)), r0)
            er1 = min(int(np.ceil((hi - y0) / pitch - 0.5)), r1)
            if er1 <= er0:
                continue
            rows = np.arange(er0, er1)
            cy = y0 + (rows + 0.5) * pitch
            xc = xa + (cy - ya) * (xb - xa) / (yb - ya)
            cols = np.floor((xc - x0) / pitch - 0.5).astype(np.int64) + 1
            np.clip(cols - c0, 0, cw, out=cols)
            np.add.at(toggle, (rows - r0, cols), 1)

    parity = (np.cumsum(toggle[:, :cw], axis=1) & 1).astype(bool)
    sub = ids[r0:r1, c0:c1]
    sub[parity & (sub == 0)] = object_id


def raycast_first_hit(
    ids: np.ndarray,
    vis: np.ndarray,
    origins: np.ndarray,
    dirs: np.ndarray,
    clip: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """First-hit integer traversal of an ID volume for a bundle of rays.

    ``ids`` is (T, H, W) uint32 with voxel (ix, iy, iz) at ``ids[iz, iy, ix]``;
    ``vis`` is a (max_id + 1, T) uint8 visibility table (row 0 must be zero);
    ``clip`` is ``[active, ox, oy, oz, nx, ny, nz]`` in voxel coordinates,
    removing voxels whose center has positive signed distance.

    Returns ``(hit_id, hit_vox)``: int32 arrays of shape (n,) and (n, 3), with
    hit_id 0 and hit_vox -1 where the ray exits without a visible hit.
    """
    depth, height, width = ids.shape
    n = origins.shape[0]
    hit_id = np.zeros(n, dtype=np.int32)
    hit_vox = np.full((n, 3), -1, dtype=np.int32)
    if n == 0:
        return hit_id, hit_vox

    size = np.array([width, height, depth], dtype=np.float64)
    o = np.ascontiguousarray(origins, dtype=np.float64)
    d = np.ascontiguousarray(dirs, dtype=np.float64)

    par = np.abs(d) < 1e-12
    safe = np.where(par, 1.0, d)
    invd = 1.0 / safe
    ta = (0.0 - o) * invd
    tb = (size[None, :] - o) * invd
    tlo = np.where(par, -np.inf, np.minimum(ta, tb))
    thi = np.where(par, np.inf, np.maximum(ta, tb))
    tenter = np.max(tlo, axis=1)
    texit = np.min(thi, axis=1)
    miss_par = (par & ((o < 0.0) | (o > size[None, :]))).any(axis=1)
    t0 = np.maximum(tenter, 0.0)
    ok = ~miss_par & (texit > t0)

    p = o + (t0 + 1e-9)[:, None] * d
    vox = np.clip(np.floor(p).astype(np.int64), 0, (size - 1).astype(np.int64)[None, :])
    step = np.where(d > 0.0, 1, -1).astype(np.int64)
    bound = np.where(d > 0.0, vox + 1.0, vox.astype(np.float64))
    tmax = np.where(par, np.inf, (bound - o) * invd)
    tdelta = np.where(par, np.inf, np.abs(invd))

    clip_active = clip[0] != 0.0
    clip_o = clip[1:4]
    clip_n = clip[4:7]
    max_id = vis.shape[0]

    active = np.nonzero(ok)[0]
    while active.size:
        v = vox[active]
        here = ids[v[:, 2], v[:, 1], v[:, 0]].astype(np.int64)
        here[here >= max_id] = 0
        visible = (here != 0) & (vis[here, v[:, 2]] != 0)
        if clip_active:
            cd = ((v + 0.5) - clip_o[None, :]) @ clip_n
            visible &= cd <= 0.0
        hits = active[visible]
        hit_id[hits] = here[visible]
        hit_vox[hits] = v[visible]

        adv = active[~visible]
        if adv.size == 0:
            break
        tm = tmax[adv]
        ax = np.argmin(tm, axis=1)
        vox[adv, ax] += step[adv, ax]
        tmax[adv, ax] += tdelta[adv, ax]
        nv = vox[adv]
        inside = ((nv >= 0) & (nv < size.astype(np.int64)[None, :])).all(axis=1)
        active = adv[inside]

    return hit_id, hit_vox


def raster_triangles(
    pts: np.ndarray,
    z: np.ndarray,
    colors: np.ndarray,
    height: int,
    width: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Z-buffered flat-color triangle rasterization.

    ``pts`` is (M, 3, 2) float64 pixel coordinates, ``z`` (M, 3) per-vertex
    depth (smaller = closer), ``colors`` (M, 3) float32 per-triangle color.
    Inclusive inside test (barycentric >= 0); depth ties keep the earlier
    triangle.  Returns (image (H, W, 3) float32, zbuf, tri_index int32).
    """
    img = np.zeros((height, width, 3), dtype=np.float32)
    zbuf = np.full((height, width), np.inf, dtype=np.float64)
    tri_idx = np.full((height, width), -1, dtype=np.int32)

    for m in range(pts.shape[0]):
        x0p, y0p = pts[m, 0]
        x1p, y1p = pts[m, 1]
        x2p, y2p = pts[m, 2]
        denom = (y1p - y2p) * (x0p - x2p) + (x2p - x1p) * (y0p - y2p)
        if abs(denom) < 1e-12:
            continue
        r0 = max(int(np.ceil(min(y0p, y1p, y2p) - 0.5)), 0)
        r1 = min(int(np.floor(max(y0p, y1p, y2p) - 0.5)), height - 1)
        c0 = max(int(np.ceil(min(x0p, x1p, x2p) - 0.5)), 0)
        c1 = min(int(np.floor(max(x0p, x1p, x2p) - 0.5)), width - 1)
        if r1 < r0 or c1 < c0:
            continue
        py, px = np.mgrid[r0 : r1 + 1, c0 : c1 + 1].astype(np.float64)
        px += 0.5
        py += 0.5
        w0 = ((y1p - y2p) * (px - x2p) + (x2p - x1p) * (py - y2p)) / denom
        w1 = ((y2p - y0p) * (px - x2p) + (x0p - x2p) * (py - y2p)) / denom
        w2 = 1.0 - w0 - w1
        inside = (w0 >= 0.0) & (w1 >= 0.0) & (w2 >= 0.0)
        if not inside.any():
            continue
        depth = w0 * z[m, 0] + w1 * z[m, 1] + w2 * z[m, 2]
        sub_z = zbuf[r0 : r1 + 1, c0 : c1 + 1]
        win = inside & (depth < sub_z)
        if not win.any():
            continue
        sub_z[win] = depth[win]
        img[r0 : r1 + 1, c0 : c1 + 1][win] = colors[m]
        tri_idx[r0 : r1 + 1, c0 : c1 + 1][win] = m

    return img, zbuf, tri_idx

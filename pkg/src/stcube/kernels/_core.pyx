# Compiled twins of the kernels in _pure.py.  Expression order is kept
# identical to the numpy versions so both backends produce bit-identical
# output (no -ffast-math, no FMA contraction at baseline x86-64).

import numpy as np

cimport numpy as cnp
from libc.math cimport ceil, fabs, floor

cnp.import_array()


def fill_polygon(
    cnp.uint32_t[:, ::1] ids,
    unsigned int object_id,
    double[::1] vx,
    double[::1] vy,
    cnp.int64_t[::1] starts,
    double x0,
    double y0,
    double pitch,
):
    cdef Py_ssize_t height = ids.shape[0]
    cdef Py_ssize_t width = ids.shape[1]
    cdef Py_ssize_t nv = vx.shape[0]
    if nv == 0:
        return

    cdef double ymin = vy[0], ymax = vy[0], xmin = vx[0], xmax = vx[0]
    cdef Py_ssize_t i
    for i in range(1, nv):
        if vy[i] < ymin: ymin = vy[i]
        if vy[i] > ymax: ymax = vy[i]
        if vx[i] < xmin: xmin = vx[i]
        if vx[i] > xmax: xmax = vx[i]

    cdef Py_ssize_t r0 = <Py_ssize_t>ceil((ymin - y0) / pitch - 0.5)
    cdef Py_ssize_t r1 = <Py_ssize_t>ceil((ymax - y0) / pitch - 0.5)
    if r0 < 0: r0 = 0
    if r1 > height: r1 = height
    if r1 <= r0:
        return
    cdef Py_ssize_t c0 = <Py_ssize_t>floor((xmin - x0) / pitch - 0.5) + 1
    cdef Py_ssize_t c1 = <Py_ssize_t>floor((xmax - x0) / pitch - 0.5) + 1
    if c0 < 0: c0 = 0
    if c1 > width: c1 = width
    if c1 <= c0:
        return

    cdef Py_ssize_t cw = c1 - c0
    toggle_arr = np.zeros((r1 - r0, cw + 1), dtype=np.int32)
    cdef cnp.int32_t[:, ::1] toggle = toggle_arr

    cdef Py_ssize_t nloops = starts.shape[0] - 1
    cdef Py_ssize_t li, a, b, n, e, er0, er1, r, col
    cdef double xa, ya, xb, yb, lo, hi, cy, xc
    for li in range(nloops):
        a = starts[li]
        b = starts[li + 1]
        n = b - a
        if n < 3:
            continue
        for e in range(n):
            xa = vx[a + e]
            ya = vy[a + e]
            if e + 1 < n:
                xb = vx[a + e + 1]
                yb = vy[a + e + 1]
            else:
                xb = vx[a]
                yb = vy[a]
            if ya == yb:
                continue
            if ya < yb:
                lo = ya; hi = yb
            else:
                lo = yb; hi = ya
            er0 = <Py_ssize_t>ceil((lo - y0) / pitch - 0.5)
            er1 = <Py_ssize_t>ceil((hi - y0) / pitch - 0.5)
            if er0 < r0: er0 = r0
            if er1 > r1: er1 = r1
            for r in range(er0, er1):
                cy = y0 + (r + 0.5) * pitch
                xc = xa + (cy - ya) * (xb - xa) / (yb - ya)
                col = <Py_ssize_t>floor((xc - x0) / pitch - 0.5) + 1 - c0
                if col < 0: col = 0
                if col > cw: col = cw
                toggle[r - r0, col] += 1

    cdef Py_ssize_t c
    cdef int acc
    for r in range(r1 - r0):
        acc = 0
        for c in range(cw):
            acc += toggle[r, c]
            if (acc & 1) and ids[r0 + r, c0 + c] == 0:
                ids[r0 + r, c0 + c] = object_id


def raycast_first_hit(
    cnp.uint32_t[:, :, ::1] ids,
    cnp.uint8_t[:, ::1] vis,
    double[:, ::1] origins,
    double[:, ::1] dirs,
    double[::1] clip,
):
    cdef Py_ssize_t depth = ids.shape[0]
    cdef Py_ssize_t height = ids.shape[1]
    cdef Py_ssize_t width = ids.shape[2]
    cdef Py_ssize_t n = origins.shape[0]

    hit_id_arr = np.zeros(n, dtype=np.int32)
    hit_vox_arr = np.full((n, 3), -1, dtype=np.int32)
    cdef cnp.int32_t[::1] hit_id = hit_id_arr
    cdef cnp.int32_t[:, ::1] hit_vox = hit_vox_arr

    cdef double[3] size
    size[0] = width; size[1] = height; size[2] = depth
    cdef bint clip_active = clip[0] != 0.0
    cdef double cox = clip[1], coy = clip[2], coz = clip[3]
    cdef double cnx = clip[4], cny = clip[5], cnz = clip[6]
    cdef Py_ssize_t max_id = vis.shape[0]

    cdef Py_ssize_t k, ax, axis
    cdef double[3] o, d, invd, tmax, tdelta
    cdef bint[3] par
    cdef long[3] vox, step
    cdef double ta, tb, tlo, thi, tenter, texit, t0, p, bound, cd
    cdef bint miss, visible
    cdef unsigned int vid

    for k in range(n):
        for ax in range(3):
            o[ax] = origins[k, ax]
            d[ax] = dirs[k, ax]
            par[ax] = fabs(d[ax]) < 1e-12

        miss = False
        tenter = -1e300
        texit = 1e300
        for ax in range(3):
            if par[ax]:
                invd[ax] = 1.0
                if o[ax] < 0.0 or o[ax] > size[ax]:
                    miss = True
            else:
                invd[ax] = 1.0 / d[ax]
                ta = (0.0 - o[ax]) * invd[ax]
                tb = (size[ax] - o[ax]) * invd[ax]
                if ta < tb:
                    tlo = ta; thi = tb
                else:
                    tlo = tb; thi = ta
                if tlo > tenter: tenter = tlo
                if thi < texit: texit = thi
        t0 = tenter if tenter > 0.0 else 0.0
        if miss or texit <= t0:
            continue

        for ax in range(3):
            p = o[ax] + (t0 + 1e-9) * d[ax]
            vox[ax] = <long>floor(p)
            if vox[ax] < 0: vox[ax] = 0
            if vox[ax] > <long>size[ax] - 1: vox[ax] = <long>size[ax] - 1
            step[ax] = 1 if d[ax] > 0.0 else -1
            bound = vox[ax] + 1.0 if d[ax] > 0.0 else vox[ax]
            if par[ax]:
                tmax[ax] = 1e300
                tdelta[ax] = 1e300
            else:
                tmax[ax] = (bound - o[ax]) * invd[ax]
                tdelta[ax] = fabs(invd[ax])

        while True:
            vid = ids[vox[2], vox[1], vox[0]]
            if vid >= max_id:
                vid = 0
            visible = vid != 0 and vis[vid, vox[2]] != 0
            if visible and clip_active:
                cd = ((vox[0] + 0.5) - cox) * cnx + ((vox[1] + 0.5) - coy) * cny \
                    + ((vox[2] + 0.5) - coz) * cnz
                if cd > 0.0:
                    visible = False
            if visible:
                hit_id[k] = <cnp.int32_t>vid
                hit_vox[k, 0] = <cnp.int32_t>vox[0]
                hit_vox[k, 1] = <cnp.int32_t>vox[1]
                hit_vox[k, 2] = <cnp.int32_t>vox[2]
                break

            if tmax[0] <= tmax[1] and tmax[0] <= tmax[2]:
                axis = 0
            elif tmax[1] <= tmax[2]:
                axis = 1
            else:
                axis = 2
            vox[axis] += step[axis]
            tmax[axis] += tdelta[axis]
            if vox[axis] < 0 or vox[axis] >= <long>size[axis]:
                break

    return hit_id_arr, hit_vox_arr


def raster_triangles(
    double[:, :, ::1] pts,
    double[:, ::1] z,
    float[:, ::1] colors,
    Py_ssize_t height,
    Py_ssize_t width,
):
    img_arr = np.zeros((height, width, 3), dtype=np.float32)
    zbuf_arr = np.full((height, width), np.inf, dtype=np.float64)
    tri_arr = np.full((height, width), -1, dtype=np.int32)
    cdef float[:, :, ::1] img = img_arr
    cdef double[:, ::1] zbuf = zbuf_arr
    cdef cnp.int32_t[:, ::1] tri_idx = tri_arr

    cdef Py_ssize_t m, r0, r1, c0, c1, r, c
    cdef double x0p, y0p, x1p, y1p, x2p, y2p, denom
    cdef double miny, maxy, minx, maxx, px, py, w0, w1, w2, dd

    for m in range(pts.shape[0]):
        x0p = pts[m, 0, 0]; y0p = pts[m, 0, 1]
        x1p = pts[m, 1, 0]; y1p = pts[m, 1, 1]
        x2p = pts[m, 2, 0]; y2p = pts[m, 2, 1]
        denom = (y1p - y2p) * (x0p - x2p) + (x2p - x1p) * (y0p - y2p)
        if fabs(denom) < 1e-12:
            continue
        miny = y0p
        if y1p < miny: miny = y1p
        if y2p < miny: miny = y2p
        maxy = y0p
        if y1p > maxy: maxy = y1p
        if y2p > maxy: maxy = y2p
        minx = x0p
        if x1p < minx: minx = x1p
        if x2p < minx: minx = x2p
        maxx = x0p
        if x1p > maxx: maxx = x1p
        if x2p > maxx: maxx = x2p
        r0 = <Py_ssize_t>ceil(miny - 0.5)
        r1 = <Py_ssize_t>floor(maxy - 0.5)
        c0 = <Py_ssize_t>ceil(minx - 0.5)
        c1 = <Py_ssize_t>floor(maxx - 0.5)
        if r0 < 0: r0 = 0
        if r1 > height - 1: r1 = height - 1
        if c0 < 0: c0 = 0
        if c1 > width - 1: c1 = width - 1
        if r1 < r0 or c1 < c0:
            continue
        for r in range(r0, r1 + 1):
            py = r + 0.5
            for c in range(c0, c1 + 1):
                px = c + 0.5
                w0 = ((y1p - y2p) * (px - x2p) + (x2p - x1p) * (py - y2p)) / denom
                w1 = ((y2p - y0p) * (px - x2p) + (x0p - x2p) * (py - y2p)) / denom
                w2 = 1.0 - w0 - w1
                if w0 >= 0.0 and w1 >= 0.0 and w2 >= 0.0:
                    dd = w0 * z[m, 0] + w1 * z[m, 1] + w2 * z[m, 2]
                    if dd < zbuf[r, c]:
                        zbuf[r, c] = dd
                        img[r, c, 0] = colors[m, 0]
                        img[r, c, 1] = colors[m, 1]
                        img[r, c, 2] = colors[m, 2]
                        tri_idx[r, c] = m

    return img_arr, zbuf_arr, tri_arr

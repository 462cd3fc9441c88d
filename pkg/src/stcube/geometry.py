"""Cutting-plane geometry: plane frames, mesh cross-sections, viewport fitting,
and ID-image rasterization.

The cutting plane turns each time step's meshes into closed 2D contour loops
in plane (u, v) coordinates; the viewport is a square window fixed across all
time steps; rasterization produces an integer ID image per step with even-odd
parity fill.  All functions are pure and deterministic.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .dataset import Dataset, Mesh, ObjectID

_ON_PLANE_NUDGE = 1e-9  # distance added when a vertex lies exactly on the plane
_CLOSE_TOL = 1e-6  # endpoint gap below which an open chain is closed


@dataclass(frozen=True)
class CutPlane:
    """Plane frame: origin plus a right-handed orthonormal (u, v, normal) triple."""

    origin: np.ndarray
    normal: np.ndarray
    basis_u: np.ndarray
    basis_v: np.ndarray

    def to_uv(self, points: np.ndarray) -> np.ndarray:
        rel = np.atleast_2d(points) - self.origin
        return np.column_stack([rel @ self.basis_u, rel @ self.basis_v])

    def from_uv(self, uv: np.ndarray) -> np.ndarray:
        uv = np.atleast_2d(uv)
        return (
            self.origin
            + uv[:, :1] * self.basis_u
            + uv[:, 1:2] * self.basis_v
        )


def plane_basis(origin, normal) -> CutPlane:
    """Complete a plane from origin and normal with a deterministic (u, v) frame.

    u = normalize(normal x z-hat), switching to x-hat when the normal is within
    0.001 of the z axis; v = normal x u.
    """
    origin = np.asarray(origin, dtype=np.float64).reshape(3)
    normal = np.asarray(normal, dtype=np.float64).reshape(3)
    norm = np.linalg.norm(normal)
    if norm == 0.0:
        raise ValueError("plane normal must be nonzero")
    n = normal / norm
    zhat = np.array([0.0, 0.0, 1.0])
    xhat = np.array([1.0, 0.0, 0.0])
    ref = xhat if abs(float(n @ zhat)) > 0.999 else zhat
    u = np.cross(n, ref)
    u /= np.linalg.norm(u)
    v = np.cross(n, u)
    return CutPlane(origin=origin, normal=n, basis_u=u, basis_v=v)


@dataclass(frozen=True)
class Viewport:
    """Square capture window in plane coordinates, fixed for all time steps."""

    center_uv: np.ndarray
    half_extent: float
    epsilon: float  # slab half-thickness for render-time cut consistency

    def __post_init__(self):
        if self.half_extent <= 0:
            raise ValueError("half_extent must be positive")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")


@dataclass
class Contour:
    """Closed cross-section loops of one object, counter-clockwise in (u, v)."""

    object: ObjectID
    loops: list[np.ndarray] = field(default_factory=list)

    def signed_area(self) -> float:
        total = 0.0
        for loop in self.loops:
            x, y = loop[:, 0], loop[:, 1]
            total += 0.5 * float(
                np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)
            )
        return total

    def bounds(self) -> np.ndarray | None:
        """[umin, vmin, umax, vmax] over all loops, or None when empty."""
        if not self.loops:
            return None
        pts = np.concatenate(self.loops)
        return np.concatenate([pts.min(axis=0), pts.max(axis=0)])


@dataclass
class IDImage:
    """Integer object-ID raster; 0 marks empty pixels.

    ``uv_transform`` is a 2x3 affine taking homogeneous pixel centers
    (col + 0.5, row + 0.5, 1) to 2D plane coordinates.  Rows grow with v.
    """

    width: int
    height: int
    pixels: np.ndarray  # (height, width) uint32
    uv_transform: np.ndarray  # (2, 3) float64

    def pixel_centers_uv(self, cols: np.ndarray, rows: np.ndarray) -> np.ndarray:
        h = np.column_stack(
            [np.asarray(cols) + 0.5, np.asarray(rows) + 0.5, np.ones(np.size(cols))]
        )
        return h @ self.uv_transform.T

    def uv_to_pixel(self, uv: np.ndarray) -> np.ndarray:
        """Continuous pixel coordinates (col, row) for the given uv points."""
        m = self.uv_transform
        inv = np.linalg.inv(m[:, :2])
        rel = np.atleast_2d(uv) - m[:, 2]
        return rel @ inv.T - 0.5


def _capture_transform(vp: Viewport, res: int) -> np.ndarray:
    pitch = 2.0 * vp.half_extent / res
    u0 = float(vp.center_uv[0]) - vp.half_extent
    v0 = float(vp.center_uv[1]) - vp.half_extent
    return np.array([[pitch, 0.0, u0], [0.0, pitch, v0]], dtype=np.float64)


def section_contours(m: Mesh, p: CutPlane, object_id: ObjectID = 0) -> Contour:
    """Cross-section loops of one mesh.  Empty when the mesh misses the plane."""
    result = section_meshes({object_id: m}, p)
    return result[0] if result else Contour(object=object_id, loops=[])


def section_meshes(meshes: dict[ObjectID, Mesh], p: CutPlane) -> list[Contour]:
    """Cross-sections of many meshes against one plane, batched.

    Intersection points are computed on canonical (sorted-index) mesh edges so
    both triangles sharing an edge produce bit-identical points; segments are
    chained by edge identity, not coordinate matching.  Triangle winding
    orients every closed loop counter-clockwise for outward meshes.
    """
    order = sorted(meshes)
    if not order:
        return []

    # concatenate all meshes into one vertex/triangle soup
    vparts, tparts, owner_parts = [], [], []
    voffset = 0
    for oid in order:
        m = meshes[oid]
        vparts.append(m.vertices)
        tparts.append(m.triangles.astype(np.int64) + voffset)
        owner_parts.append(np.full(len(m.triangles), oid, dtype=np.int64))
        voffset += len(m.vertices)
    verts = np.concatenate(vparts)
    tris = np.concatenate(tparts)
    owner = np.concatenate(owner_parts)

    d = (verts - p.origin) @ p.normal
    d[d == 0.0] += _ON_PLANE_NUDGE

    da, db, dc = d[tris[:, 0]], d[tris[:, 1]], d[tris[:, 2]]
    cross_ab = (da * db) < 0.0
    cross_bc = (db * dc) < 0.0
    cross_ca = (dc * da) < 0.0
    live = cross_ab | cross_bc | cross_ca
    if not live.any():
        return [Contour(object=oid, loops=[]) for oid in order]

    tris = tris[live]
    owner = owner[live]
    crossings = np.stack(
        [cross_ab[live], cross_bc[live], cross_ca[live]], axis=1
    )  # (k, 3) edges in order ab, bc, ca

    edge_pairs = np.stack(
        [tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]], axis=1
    )  # (k, 3, 2)
    lo = edge_pairs.min(axis=2)
    hi = edge_pairs.max(axis=2)
    keys = lo * voffset + hi  # unique per undirected edge

    # non-crossing lanes divide by ~0 and are masked out below
    with np.errstate(divide="ignore", invalid="ignore"):
        t = d[lo] / (d[lo] - d[hi])  # (k, 3)
        pts = verts[lo] + t[:, :, None] * (verts[hi] - verts[lo])  # (k, 3, 3)

    # exactly two crossing edges per surviving triangle: pick them in edge order
    k = len(tris)
    first = crossings.argmax(axis=1)
    rev = crossings[:, ::-1].argmax(axis=1)
    second = 2 - rev
    rows = np.arange(k)
    p1 = pts[rows, first]
    p2 = pts[rows, second]
    k1 = keys[rows, first]
    k2 = keys[rows, second]

    # orient each segment along normal x triangle-normal, giving CCW loops
    va = verts[tris[:, 0]]
    tn = np.cross(verts[tris[:, 1]] - va, verts[tris[:, 2]] - va)
    seg_dir = np.cross(np.broadcast_to(p.normal, tn.shape), tn)
    flip = np.einsum("ij,ij->i", p2 - p1, seg_dir) < 0.0
    p1[flip], p2[flip] = p2[flip].copy(), p1[flip].copy()
    k1[flip], k2[flip] = k2[flip].copy(), k1[flip].copy()

    uv1 = p.to_uv(p1)
    uv2 = p.to_uv(p2)

    out = []
    for oid in order:
        mask = owner == oid
        loops = _chain_segments(uv1[mask], uv2[mask], k1[mask], k2[mask])
        out.append(Contour(object=oid, loops=loops))
    return out


def _chain_segments(uv1, uv2, k1, k2) -> list[np.ndarray]:
    """Chain oriented segments into loops by shared edge identity."""
    n = len(k1)
    by_start: dict[int, list[int]] = {}
    for i, key in enumerate(k1.tolist()):
        by_start.setdefault(key, []).append(i)
    used = np.zeros(n, dtype=bool)
    loops: list[np.ndarray] = []

    for i in range(n):
        if used[i]:
            continue
        used[i] = True
        points = [uv1[i], uv2[i]]
        start_key = int(k1[i])
        cur_key = int(k2[i])
        closed = False
        while True:
            if cur_key == start_key:
                closed = True
                points.pop()  # closing point duplicates the first
                break
            cands = by_start.get(cur_key, ())
            nxt = next((j for j in cands if not used[j]), None)
            if nxt is None:
                break
            used[nxt] = True
            points.append(uv2[nxt])
            cur_key = int(k2[nxt])
        if not closed:
            gap = float(np.linalg.norm(points[0] - points[-1]))
            if gap < _CLOSE_TOL:
                points.pop()
                closed = True
            else:
                warnings.warn(
                    "discarding open cross-section chain "
                    f"(endpoint gap {gap:.3g})",
                    stacklevel=3,
                )
                continue
        if len(points) >= 3:
            loops.append(np.array(points))
    return loops


def fit_viewport(
    d: Dataset,
    p: CutPlane,
    padding: float = 0.02,
    res_hint: int = 256,
) -> Viewport:
    """Square window covering every cross-section at every time step.

    ``epsilon`` defaults to half a voxel pitch at the hinted capture
    resolution.
    """
    bounds = []
    for t in d.time_steps:
        for c in section_meshes(d.objects.get(t, {}), p):
            b = c.bounds()
            if b is not None:
                bounds.append(b)
    if not bounds:
        raise ValueError("no mesh crosses the plane at any time step")
    return viewport_from_bounds(np.array(bounds), padding, res_hint)


def viewport_from_bounds(
    bounds: np.ndarray, padding: float = 0.02, res_hint: int = 256
) -> Viewport:
    lo = bounds[:, :2].min(axis=0)
    hi = bounds[:, 2:].max(axis=0)
    center = (lo + hi) / 2.0
    half = float((hi - lo).max() / 2.0) * (1.0 + padding)
    if half <= 0:
        half = 1e-6
    pitch = 2.0 * half / res_hint
    return Viewport(center_uv=center, half_extent=half, epsilon=0.5 * pitch)


def rasterize_section(contours: list[Contour], vp: Viewport, res: int) -> IDImage:
    """Even-odd fill of all contours into one ID image.

    Objects are filled in ascending ID order and only empty pixels are
    claimed, so overlaps resolve to the smallest ID.
    """
    if res < 2:
        raise ValueError("resolution must be at least 2")
    from .kernels import fill_polygon

    transform = _capture_transform(vp, res)
    pitch = transform[0, 0]
    u0 = transform[0, 2]
    v0 = transform[1, 2]
    ids = np.zeros((res, res), dtype=np.uint32)
    for contour in sorted(contours, key=lambda c: c.object):
        loops = [l for l in contour.loops if len(l) >= 3]
        if not loops:
            continue
        vx = np.ascontiguousarray(np.concatenate([l[:, 0] for l in loops]))
        vy = np.ascontiguousarray(np.concatenate([l[:, 1] for l in loops]))
        starts = np.zeros(len(loops) + 1, dtype=np.int64)
        np.cumsum([len(l) for l in loops], out=starts[1:])
        fill_polygon(ids, int(contour.object), vx, vy, starts, u0, v0, pitch)
    return IDImage(width=res, height=res, pixels=ids, uv_transform=transform)


def export_id_image(img: IDImage, path) -> None:
    """Write the raster as 16-bit grayscale PNG (IDs above 65535 saturate)."""
    from PIL import Image

    data = np.minimum(img.pixels, 65535).astype(np.uint16)
    # flip so v points up in the file; uint16 maps to mode I;16
    Image.fromarray(data[::-1]).save(path)

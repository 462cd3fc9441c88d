"""Opaque rendering of STC volumes and mesh time steps, plus picking.

Both views share one color pipeline: a value texture normalizes the active
property per (object, time), a gradient turns values into base colors,
session state decides visibility and highlighting, and Blinn-Phong handles
shading.  Volume rendering is strictly first-hit opaque: a pixel is either
background (alpha 0) or one voxel's shaded color (alpha 255).
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from .dataset import CATEGORICAL, CONTINUOUS, Dataset, ObjectID
from .geometry import CutPlane, Viewport
from .kernels import raster_triangles, raycast_first_hit
from .session import HIGHLIGHTED, SessionState, visibility_lut, visible
from .volume import NormalVolume, STCVolume

_ABSENT_GRAY = np.array([0.5, 0.5, 0.5])


@dataclass
class ValueTexture:
    """Per-(object, time) normalized property values for colormapping.

    ``grid[i, k]`` holds the normalized value (continuous) or the category
    index (categorical) of object i at time ``t0 + k``; ``present`` marks
    stored entries.  ``vmin``/``vmax`` let callers invert the normalization.
    """

    property: str
    kind: str
    t0: int
    grid: np.ndarray  # (max_id + 1, n_steps) float64
    present: np.ndarray  # same shape, bool
    vmin: float = 0.0
    vmax: float = 1.0
    labels: tuple[str, ...] = ()

    def _index(self, obj: ObjectID, t: int) -> tuple[int, int] | None:
        k = t - self.t0
        if 0 <= obj < self.grid.shape[0] and 0 <= k < self.grid.shape[1]:
            return obj, k
        return None

    def has_value(self, obj: ObjectID, t: int) -> bool:
        idx = self._index(obj, t)
        return bool(self.present[idx]) if idx else False

    def value(self, obj: ObjectID, t: int) -> float:
        idx = self._index(obj, t)
        if not idx or not self.present[idx]:
            raise KeyError(f"no value for ({obj}, {t})")
        return float(self.grid[idx])

    def label(self, obj: ObjectID, t: int) -> str | None:
        if self.kind != CATEGORICAL:
            return None
        idx = self._index(obj, t)
        if not idx or not self.present[idx]:
            return None
        return self.labels[int(self.grid[idx])]

    def denormalize(self, x) -> np.ndarray:
        return self.vmin + np.asarray(x) * (self.vmax - self.vmin)

    # dense accessors for visibility-LUT construction
    def _time_index(self, time_map: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        k = np.asarray(time_map) - self.t0
        ok = (k >= 0) & (k < self.grid.shape[1])
        return np.where(ok, k, 0), ok

    def present_grid(self, max_id: int, time_map: np.ndarray) -> np.ndarray:
        k, ok = self._time_index(time_map)
        rows = min(max_id + 1, self.grid.shape[0])
        out = np.zeros((max_id + 1, len(k)), dtype=bool)
        out[:rows] = self.present[:rows][:, k] & ok
        return out

    def value_grid(self, max_id: int, time_map: np.ndarray) -> np.ndarray:
        k, _ = self._time_index(time_map)
        rows = min(max_id + 1, self.grid.shape[0])
        out = np.zeros((max_id + 1, len(k)), dtype=np.float64)
        out[:rows] = self.grid[:rows][:, k]
        return out

    def label_mask(
        self, max_id: int, time_map: np.ndarray, labels: frozenset[str]
    ) -> np.ndarray:
        if self.kind != CATEGORICAL:
            return np.zeros((max_id + 1, len(np.asarray(time_map))), dtype=bool)
        chosen = np.array(
            [lab in labels for lab in self.labels], dtype=bool
        )
        idx = self.value_grid(max_id, time_map).astype(np.int64)
        idx = np.clip(idx, 0, max(len(self.labels) - 1, 0))
        ok = chosen[idx] if len(self.labels) else np.zeros_like(idx, dtype=bool)
        return ok & self.present_grid(max_id, time_map)


def bake_value_texture(d: Dataset, name: str) -> ValueTexture:
    """Normalize one property over all stored entries.

    Continuous: (v - min) / (max - min), all 0.5 when the range collapses.
    Categorical: index into the sorted label list.
    """
    kind = d.properties.kinds.get(name)
    if kind is None:
        raise KeyError(f"unknown property {name!r}")
    entries = d.properties.values[name]
    t0 = d.time_steps[0]
    n_steps = len(d.time_steps)
    max_id = d.max_id()
    grid = np.zeros((max_id + 1, n_steps), dtype=np.float64)
    present = np.zeros((max_id + 1, n_steps), dtype=bool)

    if kind == CONTINUOUS:
        vals = [float(v) for v in entries.values()]
        vmin = min(vals) if vals else 0.0
        vmax = max(vals) if vals else 1.0
        span = vmax - vmin
        for (obj, t), v in entries.items():
            k = t - t0
            if 0 <= obj <= max_id and 0 <= k < n_steps:
                grid[obj, k] = 0.5 if span == 0.0 else (float(v) - vmin) / span
                present[obj, k] = True
        return ValueTexture(name, kind, t0, grid, present, vmin, vmax)

    labels = tuple(sorted({str(v) for v in entries.values()}))
    index = {lab: i for i, lab in enumerate(labels)}
    for (obj, t), v in entries.items():
        k = t - t0
        if 0 <= obj <= max_id and 0 <= k < n_steps:
            grid[obj, k] = index[str(v)]
            present[obj, k] = True
    return ValueTexture(name, kind, t0, grid, present, 0.0, 1.0, labels)


@dataclass(frozen=True)
class ColorGradient:
    """Piecewise-linear RGB gradient over [0, 1]."""

    name: str
    stops: tuple[tuple[float, tuple[float, float, float]], ...]

    def __post_init__(self):
        pos = [p for p, _ in self.stops]
        if len(pos) < 2 or pos[0] != 0.0 or pos[-1] != 1.0:
            raise ValueError("gradient stops must start at 0 and end at 1")
        if any(b <= a for a, b in zip(pos, pos[1:])):
            raise ValueError("gradient stop positions must strictly increase")

    def lookup(self, x) -> np.ndarray:
        """RGB for normalized values (clipped into [0, 1]); shape (..., 3)."""
        x = np.clip(np.asarray(x, dtype=np.float64), 0.0, 1.0)
        pos = np.array([p for p, _ in self.stops])
        cols = np.array([c for _, c in self.stops])
        out = np.stack(
            [np.interp(x, pos, cols[:, ch]) for ch in range(3)], axis=-1
        )
        return out

    def categorical_colors(self, n: int) -> np.ndarray:
        """n colors sampled at evenly spaced gradient positions."""
        if n <= 0:
            return np.zeros((0, 3))
        return self.lookup((np.arange(n) + 0.5) / n)


GRADIENTS: dict[str, ColorGradient] = {
    g.name: g
    for g in [
        ColorGradient(
            "viridis",
            (
                (0.0, (0.267, 0.005, 0.329)),
                (0.25, (0.229, 0.322, 0.546)),
                (0.5, (0.128, 0.567, 0.551)),
                (0.75, (0.369, 0.789, 0.383)),
                (1.0, (0.993, 0.906, 0.144)),
            ),
        ),
        ColorGradient(
            "plasma",
            (
                (0.0, (0.050, 0.030, 0.528)),
                (0.25, (0.494, 0.012, 0.658)),
                (0.5, (0.798, 0.280, 0.470)),
                (0.75, (0.973, 0.586, 0.252)),
                (1.0, (0.940, 0.975, 0.131)),
            ),
        ),
        ColorGradient(
            "coolwarm",
            (
                (0.0, (0.230, 0.299, 0.754)),
                (0.5, (0.865, 0.865, 0.865)),
                (1.0, (0.706, 0.016, 0.150)),
            ),
        ),
        ColorGradient("grayscale", ((0.0, (0.0, 0.0, 0.0)), (1.0, (1.0, 1.0, 1.0)))),
    ]
}


def get_gradient(name: str) -> ColorGradient:
    try:
        return GRADIENTS[name]
    except KeyError:
        raise ValueError(
            f"unknown gradient {name!r}; have {sorted(GRADIENTS)}"
        ) from None


@dataclass(frozen=True)
class RenderStyle:
    """Lighting, background, highlight, and optional cut-away clip plane.

    ``clip`` is given in the render target's own coordinates (voxel space for
    the STC view, dataset space for the mesh view); voxels or faces on the
    positive side of its normal are cut away.
    """

    light_pos: tuple[float, float, float] = (0.0, 0.0, 0.0)
    ambient: float = 0.2
    diffuse: float = 0.7
    specular: float = 0.2
    shininess: float = 32.0
    background: tuple[float, float, float] = (0.08, 0.08, 0.10)
    highlight: tuple[float, float, float] = (1.0, 0.9, 0.2)
    clip: CutPlane | None = None

    def __post_init__(self):
        if min(self.ambient, self.diffuse, self.specular, self.shininess) < 0:
            raise ValueError("lighting coefficients must be non-negative")


@dataclass(frozen=True)
class Camera:
    """Orthographic or perspective camera; image plane spans width x height pixels."""

    position: tuple[float, float, float]
    view_dir: tuple[float, float, float]
    up: tuple[float, float, float]
    width: int
    height: int
    mode: str = "orthographic"
    ortho_half_height: float = 1.0
    fov_y_deg: float = 45.0

    def basis(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        f = np.asarray(self.view_dir, dtype=np.float64)
        nf = np.linalg.norm(f)
        if nf == 0:
            raise ValueError("view direction must be nonzero")
        f = f / nf
        up = np.asarray(self.up, dtype=np.float64)
        r = np.cross(f, up)
        nr = np.linalg.norm(r)
        if nr < 1e-12:
            raise ValueError("view direction and up vector are parallel")
        r = r / nr
        u = np.cross(r, f)
        return f, r, u

    def rays(
        self, cols: np.ndarray, rows: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray]:
        """Ray origins and unit directions for (col, row) pixel indices."""
        f, r, u = self.basis()
        pos = np.asarray(self.position, dtype=np.float64)
        ndc_x = (np.asarray(cols, dtype=np.float64) + 0.5) / self.width * 2.0 - 1.0
        ndc_y = 1.0 - (np.asarray(rows, dtype=np.float64) + 0.5) / self.height * 2.0
        if self.mode == "orthographic":
            hh = self.ortho_half_height
            hw = hh * self.width / self.height
            origins = (
                pos + ndc_x[:, None] * hw * r + ndc_y[:, None] * hh * u
            )
            dirs = np.broadcast_to(f, origins.shape).copy()
            return origins, dirs
        if self.mode == "perspective":
            ty = math.tan(math.radians(self.fov_y_deg) / 2.0)
            tx = ty * self.width / self.height
            dirs = (
                f + ndc_x[:, None] * tx * r + ndc_y[:, None] * ty * u
            )
            dirs = dirs / np.linalg.norm(dirs, axis=1, keepdims=True)
            origins = np.broadcast_to(pos, dirs.shape).copy()
            return origins, dirs
        raise ValueError(f"unknown camera mode {self.mode!r}")

    def all_rays(self) -> tuple[np.ndarray, np.ndarray]:
        rows, cols = np.divmod(np.arange(self.width * self.height), self.width)
        return self.rays(cols, rows)


def base_color_lut(
    vt: ValueTexture | None,
    grad: ColorGradient,
    session: SessionState,
    max_id: int,
    time_map: np.ndarray,
) -> np.ndarray:
    """(max_id + 1, depth, 3) base colors before shading.

    Absent values render mid-gray; highlighted objects are pre-blended 50%
    toward the session style's highlight color by the caller's style.
    """
    depth = len(np.asarray(time_map))
    lut = np.empty((max_id + 1, depth, 3), dtype=np.float64)
    lut[:] = _ABSENT_GRAY
    if vt is not None:
        present = vt.present_grid(max_id, time_map)
        values = vt.value_grid(max_id, time_map)
        if vt.kind == CATEGORICAL:
            palette = grad.categorical_colors(len(vt.labels))
            idx = np.clip(values.astype(np.int64), 0, max(len(vt.labels) - 1, 0))
            colors = palette[idx] if len(vt.labels) else np.zeros(idx.shape + (3,))
        else:
            colors = grad.lookup(values)
        lut[present] = colors[present]
    return lut


def _apply_highlight(
    lut: np.ndarray, session: SessionState, style: RenderStyle
) -> np.ndarray:
    hl = np.asarray(style.highlight, dtype=np.float64)
    for obj, state in session.object_states.items():
        if state == HIGHLIGHTED and 0 <= obj < lut.shape[0]:
            lut[obj] = 0.5 * lut[obj] + 0.5 * hl
    return lut


def _clip_array(clip: CutPlane | None) -> np.ndarray:
    if clip is None:
        return np.zeros(7, dtype=np.float64)
    return np.concatenate([clip.origin, clip.normal, [1.0]])


def _shade(
    base: np.ndarray,
    normals: np.ndarray,
    points: np.ndarray,
    view_dirs: np.ndarray,
    style: RenderStyle,
) -> np.ndarray:
    """Blinn-Phong with a point light; zero normals get ambient only."""
    light = np.asarray(style.light_pos, dtype=np.float64)
    L = light - points
    Ln = np.linalg.norm(L, axis=-1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        L = np.where(Ln > 0, L / Ln, 0.0)
    diff = np.maximum(np.sum(normals * L, axis=-1), 0.0)
    H = L + view_dirs
    Hn = np.linalg.norm(H, axis=-1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        H = np.where(Hn > 0, H / Hn, 0.0)
    spec = np.maximum(np.sum(normals * H, axis=-1), 0.0) ** style.shininess
    spec = np.where(diff > 0, spec, 0.0)
    rgb = base * (style.ambient + style.diffuse * diff)[..., None]
    rgb = rgb + (style.specular * spec)[..., None]
    return np.clip(rgb, 0.0, 1.0)


def render_stc(
    v: STCVolume,
    n: NormalVolume,
    cam: Camera,
    style: RenderStyle,
    session: SessionState,
    vt: ValueTexture | None,
    grad: ColorGradient,
) -> np.ndarray:
    """First-hit opaque raycast of the volume; returns (H, W, 4) uint8 RGBA."""
    max_id = int(v.ids.max())
    lut = visibility_lut(session, vt, max_id, v.time_map)
    origins, dirs = cam.all_rays()
    hit_id, hit_vox = raycast_first_hit(
        np.ascontiguousarray(v.ids),
        np.ascontiguousarray(lut),
        origins,
        dirs,
        _clip_array(style.clip),
    )

    h, w = cam.height, cam.width
    out = np.empty((h * w, 4), dtype=np.uint8)
    bg = np.rint(np.clip(np.asarray(style.background), 0, 1) * 255).astype(np.uint8)
    out[:, :3] = bg
    out[:, 3] = 0

    hits = hit_id > 0
    if hits.any():
        ids = hit_id[hits].astype(np.int64)
        vox = hit_vox[hits]
        x, y, z = vox[:, 0], vox[:, 1], vox[:, 2]
        colors = base_color_lut(vt, grad, session, max_id, v.time_map)
        colors = _apply_highlight(colors, session, style)
        base = colors[ids, z]
        nrm = n.normals[z, y, x].astype(np.float64)
        points = vox.astype(np.float64) + 0.5
        rgb = _shade(base, nrm, points, -dirs[hits], style)
        out[hits, :3] = np.rint(rgb * 255).astype(np.uint8)
        out[hits, 3] = 255
    return out.reshape(h, w, 4)


def pick_stc(
    v: STCVolume,
    cam: Camera,
    pixel: tuple[int, int],
    session: SessionState,
    vt: ValueTexture | None = None,
    clip: CutPlane | None = None,
) -> tuple[ObjectID, int] | None:
    """First visible voxel under the pixel: (object id, dataset time) or None.

    Pass the render style's clip plane to mirror a cut-away render exactly.
    """
    px, py = pixel
    if not (0 <= px < cam.width and 0 <= py < cam.height):
        raise ValueError(f"pixel {pixel} outside {cam.width}x{cam.height} image")
    max_id = int(v.ids.max())
    lut = visibility_lut(session, vt, max_id, v.time_map)
    origins, dirs = cam.rays(np.array([px]), np.array([py]))
    hit_id, hit_vox = raycast_first_hit(
        np.ascontiguousarray(v.ids), np.ascontiguousarray(lut),
        origins, dirs, _clip_array(clip),
    )
    if hit_id[0] == 0:
        return None
    return int(hit_id[0]), int(v.time_map[hit_vox[0, 2]])


def _project(
    cam: Camera, points: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """World points -> (continuous pixel xy, camera-space depth)."""
    f, r, u = cam.basis()
    rel = points - np.asarray(cam.position, dtype=np.float64)
    depth = rel @ f
    if cam.mode == "orthographic":
        hh = cam.ortho_half_height
        hw = hh * cam.width / cam.height
        ndc_x = (rel @ r) / hw
        ndc_y = (rel @ u) / hh
    else:
        ty = math.tan(math.radians(cam.fov_y_deg) / 2.0)
        tx = ty * cam.width / cam.height
        with np.errstate(invalid="ignore", divide="ignore"):
            ndc_x = (rel @ r) / (depth * tx)
            ndc_y = (rel @ u) / (depth * ty)
    px = (ndc_x + 1.0) * 0.5 * cam.width
    py = (1.0 - ndc_y) * 0.5 * cam.height
    return np.column_stack([px, py]), depth


def _mesh_raster(
    d: Dataset,
    t: int,
    cam: Camera,
    session: SessionState,
    vt: ValueTexture | None,
    grad: ColorGradient,
    style: RenderStyle,
):
    """Shared projection + raster pass for mesh rendering and picking."""
    if t not in d.time_steps:
        raise IndexError(f"time step {t} not in dataset")
    vis_ids = [i for i in d.ids_at(t) if visible(session, vt, i, t)]

    pts_parts, z_parts, color_parts, owner_parts = [], [], [], []
    max_id = d.max_id()
    colors = base_color_lut(vt, grad, session, max_id, np.array([t]))
    colors = _apply_highlight(colors, session, style)
    f, _, _ = cam.basis()
    cam_pos = np.asarray(cam.position, dtype=np.float64)

    for oid in vis_ids:
        mesh = d.objects[t][oid]
        tri = mesh.triangles
        if len(tri) == 0:
            continue
        xy, depth = _project(cam, mesh.vertices)
        tri_xy = xy[tri]  # (m, 3, 2)
        tri_z = depth[tri]  # (m, 3)
        keep = (tri_z > 1e-9).all(axis=1) if cam.mode == "perspective" else np.ones(len(tri), bool)
        if style.clip is not None:
            centers = mesh.vertices[tri].mean(axis=1)
            keep &= ((centers - style.clip.origin) @ style.clip.normal) <= 0.0
        if not keep.any():
            continue
        tri_xy, tri_z, tri_w = tri_xy[keep], tri_z[keep], tri[keep]

        a = mesh.vertices[tri_w[:, 0]]
        b = mesh.vertices[tri_w[:, 1]]
        c = mesh.vertices[tri_w[:, 2]]
        nf = np.cross(b - a, c - a)
        nn = np.linalg.norm(nf, axis=1, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            nf = np.where(nn > 0, nf / nn, 0.0)
        centroid = (a + b + c) / 3.0
        if cam.mode == "perspective":
            view_dirs = cam_pos - centroid
            view_dirs /= np.linalg.norm(view_dirs, axis=1, keepdims=True)
        else:
            view_dirs = np.broadcast_to(-f, nf.shape)
        # flip normals toward the viewer so back faces shade sensibly
        facing = np.sum(nf * view_dirs, axis=1, keepdims=True)
        nf = np.where(facing < 0, -nf, nf)
        base = np.broadcast_to(colors[oid, 0], nf.shape)
        rgb = _shade(base, nf, centroid, view_dirs, style)

        pts_parts.append(tri_xy)
        z_parts.append(tri_z)
        color_parts.append(rgb.astype(np.float32))
        owner_parts.append(np.full(len(tri_w), oid, dtype=np.int64))

    h, w = cam.height, cam.width
    if not pts_parts:
        img = np.zeros((h, w, 3), dtype=np.float32)
        tri_idx = np.full((h, w), -1, dtype=np.int32)
        return img, tri_idx, np.zeros(0, dtype=np.int64)
    pts = np.ascontiguousarray(np.concatenate(pts_parts))
    z = np.ascontiguousarray(np.concatenate(z_parts))
    cols = np.ascontiguousarray(np.concatenate(color_parts))
    owner = np.concatenate(owner_parts)
    img, _, tri_idx = raster_triangles(pts, z, cols, h, w)
    return img, tri_idx, owner


def render_mesh_view(
    d: Dataset,
    t: int,
    cam: Camera,
    session: SessionState,
    vt: ValueTexture | None,
    grad: ColorGradient,
    style: RenderStyle,
    overlay: tuple[CutPlane, Viewport] | None = None,
) -> np.ndarray:
    """Flat-shaded raster of all visible meshes at time t; (H, W, 4) uint8.

    ``overlay`` draws the capture window's outline, marking where the
    cutting plane slices the scene.
    """
    img, tri_idx, _ = _mesh_raster(d, t, cam, session, vt, grad, style)
    h, w = cam.height, cam.width
    out = np.empty((h, w, 4), dtype=np.uint8)
    bg = np.rint(np.clip(np.asarray(style.background), 0, 1) * 255).astype(np.uint8)
    hit = tri_idx >= 0
    out[..., :3] = np.where(
        hit[..., None], np.rint(np.clip(img, 0, 1) * 255).astype(np.uint8), bg
    )
    out[..., 3] = np.where(hit, 255, 0).astype(np.uint8)
    if overlay is not None:
        _draw_plane_outline(out, cam, *overlay)
    return out


def _draw_plane_outline(
    out: np.ndarray, cam: Camera, plane: CutPlane, vp: Viewport
) -> None:
    cu, cv = float(vp.center_uv[0]), float(vp.center_uv[1])
    e = vp.half_extent
    corners_uv = np.array(
        [[cu - e, cv - e], [cu + e, cv - e], [cu + e, cv + e], [cu - e, cv + e]]
    )
    corners = plane.from_uv(corners_uv)
    xy, depth = _project(cam, corners)
    h, w = out.shape[:2]
    color = np.array([255, 255, 255, 255], dtype=np.uint8)
    for i in range(4):
        j = (i + 1) % 4
        if depth[i] <= 0 and depth[j] <= 0:
            continue
        n_samples = int(max(abs(xy[j] - xy[i]).max() * 2, 2))
        ts = np.linspace(0.0, 1.0, n_samples)
        seg = xy[i] + ts[:, None] * (xy[j] - xy[i])
        px = np.floor(seg[:, 0]).astype(int)
        py = np.floor(seg[:, 1]).astype(int)
        ok = (px >= 0) & (px < w) & (py >= 0) & (py < h)
        out[py[ok], px[ok]] = color


def pick_mesh(
    d: Dataset,
    t: int,
    cam: Camera,
    pixel: tuple[int, int],
    session: SessionState,
    vt: ValueTexture | None = None,
    grad: ColorGradient | None = None,
    style: RenderStyle | None = None,
) -> ObjectID | None:
    """Nearest visible object under the pixel at time t, or None."""
    px, py = pixel
    if not (0 <= px < cam.width and 0 <= py < cam.height):
        raise ValueError(f"pixel {pixel} outside {cam.width}x{cam.height} image")
    grad = grad or GRADIENTS["viridis"]
    style = style or RenderStyle()
    _, tri_idx, owner = _mesh_raster(d, t, cam, session, vt, grad, style)
    face = tri_idx[py, px]
    if face < 0:
        return None
    return int(owner[face])


def encode_png(rgba: np.ndarray) -> bytes:
    """Deterministic PNG bytes for an (H, W, 4) uint8 image."""
    from PIL import Image

    buf = io.BytesIO()
    Image.fromarray(rgba, mode="RGBA").save(buf, format="PNG")
    return buf.getvalue()

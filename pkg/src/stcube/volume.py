"""Space-time cube construction: stack per-step cross-section ID images into a
W x H x T volume (depth is time), estimate boundary normals, slice, and cache.

The voxel grid is stored as a (T, H, W) array so one time slice is a
contiguous 2D view.  Normals live in STC-local coordinates: component 0 along
the image u axis, 1 along v, 2 along time depth.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.ndimage import correlate1d

from .dataset import Dataset
from .geometry import (
    CutPlane,
    IDImage,
    Viewport,
    _capture_transform,
    rasterize_section,
    section_meshes,
    viewport_from_bounds,
)

_MAGIC = b"STC1"
_NORMAL_SCALE = 32767.0


@dataclass
class STCVolume:
    """Stacked ID images: ids[k, row, col], slice k captured at time_map[k]."""

    width: int
    height: int
    depth: int
    ids: np.ndarray  # (depth, height, width) uint32
    plane: CutPlane
    viewport: Viewport
    time_map: np.ndarray  # (depth,) int32 dataset time steps

    def capture_transform(self) -> np.ndarray:
        return _capture_transform(self.viewport, self.width)

    def depth_of_time(self, t: int) -> int:
        hits = np.nonzero(self.time_map == t)[0]
        if len(hits) == 0:
            raise IndexError(f"time step {t} not in this volume")
        return int(hits[0])


@dataclass
class NormalVolume:
    """Unit outward boundary normals per voxel; zero where no gradient."""

    normals: np.ndarray  # (depth, height, width, 3) float32


def build_stc(
    d: Dataset,
    p: CutPlane,
    res: int,
    t_range: tuple[int, int] | None = None,
    padding: float = 0.02,
) -> STCVolume:
    """Section every selected time step with the plane and stack the rasters.

    ``t_range`` is half-open [a, b); None takes every dataset step.  The
    viewport is fitted once over all selected steps, so framing is identical
    for every slice.
    """
    if t_range is None:
        steps = list(d.time_steps)
    else:
        a, b = t_range
        steps = [t for t in d.time_steps if a <= t < b]
    if not steps:
        raise ValueError("empty time range")

    per_step = []
    bounds = []
    for t in steps:
        contours = section_meshes(d.objects.get(t, {}), p)
        per_step.append(contours)
        for c in contours:
            b_ = c.bounds()
            if b_ is not None:
                bounds.append(b_)
    if not bounds:
        raise ValueError("no mesh crosses the plane at any selected time step")
    vp = viewport_from_bounds(np.array(bounds), padding, res)

    ids = np.empty((len(steps), res, res), dtype=np.uint32)
    for k, contours in enumerate(per_step):
        ids[k] = rasterize_section(contours, vp, res).pixels
    return STCVolume(
        width=res,
        height=res,
        depth=len(steps),
        ids=ids,
        plane=p,
        viewport=vp,
        time_map=np.asarray(steps, dtype=np.int32),
    )


def compute_normals(v: STCVolume) -> NormalVolume:
    """Boundary normals from the binary occupancy field.

    Gradient per axis uses separable 3x3x3 kernels: smoothing [1, 2, 1] on the
    two cross axes, central difference [-1, 0, 1] on the gradient axis, with
    edge-clamped sampling.  Normals point from object into empty space
    (negated gradient of occupancy) and are unit length or exactly zero.
    """
    occ = (v.ids != 0).astype(np.float32)
    smooth = np.array([1.0, 2.0, 1.0], dtype=np.float32)
    deriv = np.array([-1.0, 0.0, 1.0], dtype=np.float32)

    def grad(axis: int) -> np.ndarray:
        g = occ
        for ax in (0, 1, 2):
            kernel = deriv if ax == axis else smooth
            g = correlate1d(g, kernel, axis=ax, mode="nearest")
        return g

    # volume axes are (t, v-row, u-col); normal components are (u, v, t)
    gx = grad(2)
    gy = grad(1)
    gt = grad(0)
    g = np.stack([gx, gy, gt], axis=-1)
    mag = np.sqrt(np.sum(g * g, axis=-1, keepdims=True))
    with np.errstate(invalid="ignore", divide="ignore"):
        n = -g / mag
    n[~np.isfinite(n)] = 0.0
    return NormalVolume(normals=n.astype(np.float32))


def stc_slice(v: STCVolume, axis: str, index: int) -> IDImage:
    """Axis-aligned 2D extraction.

    't' reproduces the original capture at ``time_map[index]`` bit-exactly,
    including its uv transform.  'x' and 'y' slices map columns to depth
    index (unit pitch) and rows to the surviving spatial axis.
    """
    if axis == "t":
        if not 0 <= index < v.depth:
            raise IndexError(f"t index {index} out of range 0..{v.depth - 1}")
        return IDImage(
            width=v.width,
            height=v.height,
            pixels=v.ids[index].copy(),
            uv_transform=v.capture_transform(),
        )
    cap = v.capture_transform()
    pitch = cap[0, 0]
    if axis == "x":
        if not 0 <= index < v.width:
            raise IndexError(f"x index {index} out of range 0..{v.width - 1}")
        pixels = np.ascontiguousarray(v.ids[:, :, index].T)  # (H rows, T cols)
        origin = cap[1, 2]
    elif axis == "y":
        if not 0 <= index < v.height:
            raise IndexError(f"y index {index} out of range 0..{v.height - 1}")
        pixels = np.ascontiguousarray(v.ids[:, index, :].T)  # (W rows, T cols)
        origin = cap[0, 2]
    else:
        raise ValueError(f"axis must be 't', 'x', or 'y', got {axis!r}")
    transform = np.array(
        [[1.0, 0.0, -0.5], [0.0, pitch, origin]], dtype=np.float64
    )
    return IDImage(
        width=pixels.shape[1],
        height=pixels.shape[0],
        pixels=pixels,
        uv_transform=transform,
    )


def save_volume(
    v: STCVolume, path: str | Path, normals: NormalVolume | None = None
) -> None:
    """Write the binary volume cache (little-endian, fixed header)."""
    flags = 1 if normals is not None else 0
    plane = v.plane
    vp = v.viewport
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<IIIB", v.width, v.height, v.depth, flags))
        fh.write(
            np.concatenate(
                [plane.origin, plane.normal, plane.basis_u, plane.basis_v]
            ).astype("<f8").tobytes()
        )
        fh.write(
            np.array(
                [vp.center_uv[0], vp.center_uv[1], vp.half_extent, vp.epsilon]
            ).astype("<f8").tobytes()
        )
        fh.write(v.time_map.astype("<i4").tobytes())
        fh.write(np.ascontiguousarray(v.ids).astype("<u4").tobytes())
        if normals is not None:
            q = np.clip(
                np.rint(normals.normals.astype(np.float64) * _NORMAL_SCALE),
                -_NORMAL_SCALE,
                _NORMAL_SCALE,
            ).astype("<i2")
            fh.write(q.tobytes())


def load_volume(path: str | Path) -> tuple[STCVolume, NormalVolume | None]:
    """Read a cache written by :func:`save_volume`."""
    with open(path, "rb") as fh:
        if fh.read(4) != _MAGIC:
            raise ValueError(f"{path}: not a volume cache file")
        w, h, t, flags = struct.unpack("<IIIB", fh.read(13))
        frame = np.frombuffer(fh.read(12 * 8), dtype="<f8")
        vp_raw = np.frombuffer(fh.read(4 * 8), dtype="<f8")
        time_map = np.frombuffer(fh.read(t * 4), dtype="<i4").astype(np.int32)
        ids = np.frombuffer(fh.read(w * h * t * 4), dtype="<u4")
        if ids.size != w * h * t:
            raise ValueError(f"{path}: truncated ID block")
        ids = ids.reshape(t, h, w).astype(np.uint32)
        normals = None
        if flags & 1:
            q = np.frombuffer(fh.read(w * h * t * 3 * 2), dtype="<i2")
            if q.size != w * h * t * 3:
                raise ValueError(f"{path}: truncated normal block")
            normals = NormalVolume(
                normals=(q.reshape(t, h, w, 3).astype(np.float32) / _NORMAL_SCALE)
            )
    plane = CutPlane(
        origin=frame[0:3].copy(),
        normal=frame[3:6].copy(),
        basis_u=frame[6:9].copy(),
        basis_v=frame[9:12].copy(),
    )
    vp = Viewport(
        center_uv=vp_raw[0:2].copy(),
        half_extent=float(vp_raw[2]),
        epsilon=float(vp_raw[3]),
    )
    volume = STCVolume(
        width=int(w),
        height=int(h),
        depth=int(t),
        ids=ids,
        plane=plane,
        viewport=vp,
        time_map=time_map,
    )
    return volume, normals

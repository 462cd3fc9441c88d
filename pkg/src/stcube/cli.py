"""Command-line driver: validate datasets, build and slice volumes, render,
benchmark, generate demo data, and serve the HTTP API.

Every command is deterministic given identical inputs; ``build`` and
``render`` run twice produce byte-identical outputs.
"""

from __future__ import annotations

import json
import os
import sys
import time
from pathlib import Path

import click
import numpy as np

from . import kernels
from .dataset import Dataset, load_dataset, validate
from .geometry import CutPlane, plane_basis, export_id_image
from .render import (
    Camera,
    GRADIENTS,
    RenderStyle,
    bake_value_texture,
    encode_png,
    get_gradient,
    render_mesh_view,
    render_stc,
)
from .session import SessionState, session_from_json
from .volume import (
    STCVolume,
    build_stc,
    compute_normals,
    load_volume,
    save_volume,
    stc_slice,
)


def _parse_plane(text: str) -> CutPlane:
    try:
        origin_s, normal_s = text.split(":")
        origin = [float(x) for x in origin_s.split(",")]
        normal = [float(x) for x in normal_s.split(",")]
        if len(origin) != 3 or len(normal) != 3:
            raise ValueError
    except ValueError:
        raise click.BadParameter(
            f"expected ox,oy,oz:nx,ny,nz, got {text!r}"
        ) from None
    return plane_basis(origin, normal)


def _parse_t_range(text: str | None) -> tuple[int, int] | None:
    if text is None:
        return None
    try:
        a, b = text.split(":")
        return int(a), int(b)
    except ValueError:
        raise click.BadParameter(f"expected a:b, got {text!r}") from None


def _default_stc_camera(v: STCVolume, size: int) -> Camera:
    center = (v.width / 2.0, v.height / 2.0, v.depth / 2.0)
    extent = max(v.width, v.height, v.depth)
    direction = np.array([-1.0, -0.8, -0.6])
    direction /= np.linalg.norm(direction)
    pos = np.asarray(center) - direction * extent * 2.0
    return Camera(
        position=tuple(pos),
        view_dir=tuple(direction),
        up=(0.0, 1.0, 0.0),
        width=size,
        height=size,
        mode="orthographic",
        ortho_half_height=extent * 0.75,
    )


def _parse_camera(text: str | None, size: int, volume: STCVolume | None) -> Camera:
    if text is None:
        if volume is None:
            raise click.BadParameter("--camera is required for the mesh view")
        return _default_stc_camera(volume, size)
    parts = text.split(":")
    if len(parts) not in (3, 4):
        raise click.BadParameter(
            "expected px,py,pz:vx,vy,vz:ux,uy,uz[:half_height]"
        )
    try:
        pos = tuple(float(x) for x in parts[0].split(","))
        view = tuple(float(x) for x in parts[1].split(","))
        up = tuple(float(x) for x in parts[2].split(","))
        hh = float(parts[3]) if len(parts) == 4 else 1.0
        if len(pos) != 3 or len(view) != 3 or len(up) != 3:
            raise ValueError
    except ValueError:
        raise click.BadParameter(f"bad camera spec {text!r}") from None
    return Camera(
        position=pos, view_dir=view, up=up, width=size, height=size,
        mode="orthographic", ortho_half_height=hh,
    )


@click.group()
def main():
    """Space-time cube toolkit for segmented time-lapse mesh data."""


@main.command("validate")
@click.argument("manifest", type=click.Path(exists=True, dir_okay=False))
def validate_cmd(manifest):
    """Check a dataset and print findings; exit 0 only when error-free."""
    d = load_dataset(manifest)
    report = validate(d)
    for err in report.errors:
        click.echo(f"error: {err}")
    for warn in report.warnings:
        click.echo(f"warning: {warn}")
    total = sum(report.counts.values())
    click.echo(
        f"{d.name}: {len(d.time_steps)} time steps, "
        f"{total} object instances, {len(report.errors)} errors, "
        f"{len(report.warnings)} warnings"
    )
    sys.exit(0 if report.accepted else 1)


@main.command("build")
@click.argument("manifest", type=click.Path(exists=True, dir_okay=False))
@click.option("--plane", required=True, help="ox,oy,oz:nx,ny,nz")
@click.option("--res", default=256, show_default=True, type=int)
@click.option("--t", "t_range", default=None, help="half-open a:b")
@click.option("-o", "out", required=True, type=click.Path(dir_okay=False))
@click.option("--normals/--no-normals", default=True, show_default=True)
def build_cmd(manifest, plane, res, t_range, out, normals):
    """Build the volume cache for one cutting plane."""
    d = load_dataset(manifest)
    p = _parse_plane(plane)
    v = build_stc(d, p, res, _parse_t_range(t_range))
    n = compute_normals(v) if normals else None
    save_volume(v, out, n)
    click.echo(f"wrote {out}: {v.width}x{v.height}x{v.depth}")


@main.command("render")
@click.argument("cache", type=click.Path(exists=True, dir_okay=False))
@click.option("--view", type=click.Choice(["stc", "mesh"]), default="stc",
              show_default=True)
@click.option("--manifest", type=click.Path(exists=True, dir_okay=False),
              default=None, help="dataset manifest (required for mesh view)")
@click.option("--time", "time_step", type=int, default=None,
              help="time step (mesh view)")
@click.option("--camera", default=None,
              help="px,py,pz:vx,vy,vz:ux,uy,uz[:half_height]")
@click.option("--size", default=512, show_default=True, type=int)
@click.option("--property", "prop", default=None)
@click.option("--gradient", default="viridis", show_default=True)
@click.option("--session", "session_path", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="session JSON file")
@click.option("--light", default=None, help="lx,ly,lz")
@click.option("-o", "out", required=True, type=click.Path(dir_okay=False))
def render_cmd(cache, view, manifest, time_step, camera, size, prop, gradient,
               session_path, light, out):
    """Render the volume cache (or the mesh view) to a deterministic PNG."""
    volume, normals = load_volume(cache)
    session = SessionState()
    if session_path:
        session = session_from_json(json.loads(Path(session_path).read_text()))
    if prop is not None:
        session = SessionState(**{**_session_kwargs(session), "active_property": prop})
    if gradient is not None:
        session = SessionState(**{**_session_kwargs(session), "active_gradient": gradient})
    grad = get_gradient(session.active_gradient)

    d = load_dataset(manifest) if manifest else None
    vt = None
    if session.active_property is not None:
        if d is None:
            raise click.BadParameter(
                "--manifest is required when --property/--session sets a property"
            )
        vt = bake_value_texture(d, session.active_property)

    if view == "stc":
        if normals is None:
            normals = compute_normals(volume)
        cam = _parse_camera(camera, size, volume)
        style = _style_with_light(light, default=(
            volume.width * 1.5, volume.height * 1.5, -volume.depth * 1.0))
        img = render_stc(volume, normals, cam, style, session, vt, grad)
    else:
        if d is None:
            raise click.BadParameter("--manifest is required for the mesh view")
        t = time_step if time_step is not None else session.time_cursor
        cam = _parse_camera(camera, size, None)
        style = _style_with_light(light, default=tuple(
            np.asarray(cam.position) * 2.0))
        img = render_mesh_view(
            d, t, cam, session, vt, grad, style,
            overlay=(volume.plane, volume.viewport),
        )
    Path(out).write_bytes(encode_png(img))
    click.echo(f"wrote {out}")


def _session_kwargs(s: SessionState) -> dict:
    return {
        "value_filter": s.value_filter,
        "time_window": s.time_window,
        "time_cursor": s.time_cursor,
        "object_states": s.object_states,
        "active_property": s.active_property,
        "active_gradient": s.active_gradient,
        "category_filter": s.category_filter,
    }


def _style_with_light(light: str | None, default) -> RenderStyle:
    if light is None:
        return RenderStyle(light_pos=tuple(float(x) for x in default))
    try:
        pos = tuple(float(x) for x in light.split(","))
        if len(pos) != 3:
            raise ValueError
    except ValueError:
        raise click.BadParameter(f"bad light spec {light!r}") from None
    return RenderStyle(light_pos=pos)


@main.command("slice")
@click.argument("cache", type=click.Path(exists=True, dir_okay=False))
@click.option("--axis", type=click.Choice(["t", "x", "y"]), required=True)
@click.option("--index", type=int, required=True)
@click.option("-o", "out", required=True, type=click.Path(dir_okay=False))
def slice_cmd(cache, axis, index, out):
    """Extract one axis-aligned ID slice as 16-bit grayscale PNG."""
    volume, _ = load_volume(cache)
    try:
        img = stc_slice(volume, axis, index)
    except IndexError as exc:
        raise click.ClickException(str(exc)) from None
    export_id_image(img, out)
    click.echo(f"wrote {out}: {img.width}x{img.height}")


@main.command("bench")
@click.argument("manifest", type=click.Path(exists=True, dir_okay=False))
@click.option("--res", default=256, show_default=True, type=int)
@click.option("--plane", default=None, help="ox,oy,oz:nx,ny,nz (default: auto)")
@click.option("--render-size", default=512, show_default=True, type=int)
def bench_cmd(manifest, res, plane, render_size):
    """Time dataset load, STC build, normals, and a render; print JSON."""
    t0 = time.perf_counter()
    d = load_dataset(manifest)
    t_load = time.perf_counter() - t0

    if plane is None:
        p = _auto_plane(d)
    else:
        p = _parse_plane(plane)

    t0 = time.perf_counter()
    v = build_stc(d, p, res)
    t_build = time.perf_counter() - t0

    t0 = time.perf_counter()
    n = compute_normals(v)
    t_normals = time.perf_counter() - t0

    cam = _default_stc_camera(v, render_size)
    style = RenderStyle(light_pos=(v.width * 1.5, v.height * 1.5, -float(v.depth)))
    grad = GRADIENTS["viridis"]
    t0 = time.perf_counter()
    img = render_stc(v, n, cam, style, SessionState(), None, grad)
    t_render = time.perf_counter() - t0

    report = {
        "dataset": {
            "name": d.name,
            "time_steps": len(d.time_steps),
            "objects": len(d.all_ids()),
            "instances": sum(d.counts().values()),
        },
        "load_seconds": round(t_load, 4),
        "build": {
            "resolution": [v.width, v.height, v.depth],
            "seconds": round(t_build, 4),
            "voxels_per_second": int(v.ids.size / t_build) if t_build else None,
        },
        "normals_seconds": round(t_normals, 4),
        "render": {
            "size": [render_size, render_size],
            "seconds": round(t_render, 4),
            "nonbackground_pixels": int((img[..., 3] == 255).sum()),
        },
        "kernels": _kernel_comparison(v),
    }
    click.echo(json.dumps(report, indent=1))


def _auto_plane(d: Dataset) -> CutPlane:
    mids = [t for t in d.time_steps]
    t_mid = mids[len(mids) // 2]
    pts = [m.vertices.mean(axis=0) for m in d.objects.get(t_mid, {}).values()]
    center = np.mean(pts, axis=0) if pts else np.zeros(3)
    return plane_basis(center, (0.0, 0.0, 1.0))


def _kernel_comparison(v: STCVolume) -> dict:
    """Time the hot kernels on both backends over identical workloads."""
    out: dict = {"active": kernels.BACKEND, "compiled_available": kernels.COMPILED_AVAILABLE}
    backs = kernels.backends()
    cam = _default_stc_camera(v, 256)
    origins, dirs = cam.all_rays()
    max_id = int(v.ids.max())
    vis = np.ones((max_id + 1, v.depth), dtype=np.uint8)
    vis[0] = 0
    clip = np.zeros(7)
    ids = np.ascontiguousarray(v.ids)
    timings: dict[str, float] = {}
    for name, mod in backs.items():
        t0 = time.perf_counter()
        mod.raycast_first_hit(ids, vis, origins, dirs, clip)
        timings[name] = time.perf_counter() - t0
    out["raycast_seconds"] = {k: round(s, 4) for k, s in timings.items()}
    if "python" in timings and "compiled" in timings and timings["compiled"] > 0:
        out["raycast_speedup"] = round(timings["python"] / timings["compiled"], 2)
    return out


@main.command("demo")
@click.argument("out_dir", type=click.Path(file_okay=False))
@click.option("--kind", type=click.Choice(["waves", "sphere"]), default="waves",
              show_default=True)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--steps", default=100, show_default=True, type=int)
def demo_cmd(out_dir, kind, seed, steps):
    """Write a synthetic dataset (manifest + meshes + tables) to a directory."""
    from .synthetic import make_wave_dataset, sphere_track_dataset, write_dataset

    if kind == "waves":
        d = make_wave_dataset(seed=seed, time_steps=steps)
    else:
        ts = np.arange(steps)
        centers = np.column_stack(
            [np.full(steps, 10.0), np.full(steps, 10.0),
             (ts - steps / 2.0) / (steps / 4.0) * 5.0]
        )
        d = sphere_track_dataset(centers, radius=5.0)
    path = write_dataset(d, out_dir)
    click.echo(f"wrote {path}")


@main.command("serve")
@click.argument("manifest", type=click.Path(exists=True, dir_okay=False))
@click.option("--port", default=8000, show_default=True, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
def serve_cmd(manifest, port, host):
    """Serve the HTTP API (STH_PORT environment variable overrides --port)."""
    import uvicorn

    from .service import create_app

    env_port = os.environ.get("STH_PORT")
    if env_port:
        port = int(env_port)
    d = load_dataset(manifest)
    app = create_app(d)
    click.echo(f"serving {d.name} on {host}:{port}")
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()

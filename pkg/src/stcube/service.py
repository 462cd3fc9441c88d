"""HTTP facade: dataset info, asynchronous STC builds, rendering, picking,
and lineage queries for the web client.

Render and pick are stateless: every request carries the full session JSON,
and responses depend only on the request plus immutable built volumes.
Builds are deduplicated by hashing the canonical build request, so identical
requests share one volume and one stc_id.
"""

from __future__ import annotations

import hashlib
import json
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Literal

from fastapi import FastAPI, HTTPException, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict, Field, field_validator

from .dataset import (
    ABSENT,
    Dataset,
    descendants,
    division_histogram,
    property_value,
    remaining_lifespan,
)
from .geometry import CutPlane, plane_basis
from .render import (
    Camera,
    GRADIENTS,
    RenderStyle,
    ValueTexture,
    bake_value_texture,
    encode_png,
    get_gradient,
    pick_mesh,
    pick_stc,
    render_mesh_view,
    render_stc,
)
from .session import SessionState, session_from_json
from .volume import NormalVolume, STCVolume, build_stc, compute_normals


class PlaneSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    origin: tuple[float, float, float]
    normal: tuple[float, float, float]

    @field_validator("normal")
    @classmethod
    def _nonzero(cls, v):
        if all(c == 0 for c in v):
            raise ValueError("normal must be nonzero")
        return v

    def to_plane(self) -> CutPlane:
        return plane_basis(self.origin, self.normal)


class BuildRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    plane: PlaneSpec
    resolution: int = Field(default=256, ge=2, le=2048)
    t_range: tuple[int, int] | None = None


class CameraSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    position: tuple[float, float, float]
    view_dir: tuple[float, float, float]
    up: tuple[float, float, float] = (0.0, 0.0, 1.0)
    width: int = Field(default=512, ge=2, le=4096)
    height: int = Field(default=512, ge=2, le=4096)
    mode: Literal["orthographic", "perspective"] = "orthographic"
    ortho_half_height: float = 1.0
    fov_y_deg: float = 45.0

    def to_camera(self) -> Camera:
        return Camera(
            position=self.position,
            view_dir=self.view_dir,
            up=self.up,
            width=self.width,
            height=self.height,
            mode=self.mode,
            ortho_half_height=self.ortho_half_height,
            fov_y_deg=self.fov_y_deg,
        )


class StyleSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    light_pos: tuple[float, float, float] = (0.0, 0.0, 0.0)
    ambient: float = Field(default=0.2, ge=0)
    diffuse: float = Field(default=0.7, ge=0)
    specular: float = Field(default=0.2, ge=0)
    shininess: float = Field(default=32.0, ge=0)
    background: tuple[float, float, float] = (0.08, 0.08, 0.10)
    highlight: tuple[float, float, float] = (1.0, 0.9, 0.2)
    clip: PlaneSpec | None = None

    def to_style(self) -> RenderStyle:
        return RenderStyle(
            light_pos=self.light_pos,
            ambient=self.ambient,
            diffuse=self.diffuse,
            specular=self.specular,
            shininess=self.shininess,
            background=self.background,
            highlight=self.highlight,
            clip=self.clip.to_plane() if self.clip else None,
        )


class RenderRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    view: Literal["stc", "mesh"]
    stc_id: str | None = None
    time: int | None = None
    camera: CameraSpec
    style: StyleSpec = StyleSpec()
    session: dict = Field(default_factory=dict)
    overlay: bool = False


class PickRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    view: Literal["stc", "mesh"]
    stc_id: str | None = None
    time: int | None = None
    camera: CameraSpec
    pixel: tuple[int, int]
    session: dict = Field(default_factory=dict)


@dataclass
class _BuildEntry:
    state: str = "building"  # building | ready | failed
    volume: STCVolume | None = None
    normals: NormalVolume | None = None
    error: str | None = None


@dataclass
class _Store:
    dataset: Dataset
    entries: dict[str, _BuildEntry] = field(default_factory=dict)
    textures: dict[str, ValueTexture] = field(default_factory=dict)
    lock: threading.Lock = field(default_factory=threading.Lock)
    executor: ThreadPoolExecutor = field(
        default_factory=lambda: ThreadPoolExecutor(max_workers=2)
    )

    def texture(self, name: str | None) -> ValueTexture | None:
        if name is None:
            return None
        if name not in self.dataset.properties.kinds:
            raise HTTPException(400, f"unknown property {name!r}")
        with self.lock:
            if name not in self.textures:
                self.textures[name] = bake_value_texture(self.dataset, name)
            return self.textures[name]


def _request_key(req: BuildRequest) -> str:
    canonical = json.dumps(req.model_dump(), sort_keys=True)
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def create_app(dataset: Dataset) -> FastAPI:
    app = FastAPI(title="space-time cube service", docs_url=None, redoc_url=None)
    store = _Store(dataset=dataset)
    app.state.store = store

    @app.exception_handler(RequestValidationError)
    async def _validation_400(request: Request, exc: RequestValidationError):
        # ctx may hold live exception objects; keep only serializable parts
        detail = [
            {"loc": list(e.get("loc", ())), "msg": str(e.get("msg", "")),
             "type": e.get("type", "")}
            for e in exc.errors()
        ]
        return JSONResponse({"detail": detail}, status_code=400)

    def _session(raw: dict) -> SessionState:
        try:
            return session_from_json(raw)
        except (ValueError, TypeError, KeyError) as exc:
            raise HTTPException(400, f"bad session: {exc}") from exc

    def _gradient(name: str):
        try:
            return get_gradient(name)
        except ValueError as exc:
            raise HTTPException(400, str(exc)) from exc

    def _entry(stc_id: str | None) -> _BuildEntry:
        if stc_id is None:
            raise HTTPException(400, "stc_id is required for the stc view")
        with store.lock:
            entry = store.entries.get(stc_id)
        if entry is None:
            raise HTTPException(404, f"unknown stc_id {stc_id!r}")
        if entry.state == "building":
            raise HTTPException(409, f"stc {stc_id!r} is still building")
        if entry.state == "failed":
            raise HTTPException(404, f"stc {stc_id!r} failed: {entry.error}")
        return entry

    @app.get("/api/info")
    def info():
        d = store.dataset
        return {
            "name": d.name,
            "units": d.units,
            "time_range": [d.time_steps[0], d.time_steps[-1]],
            "object_counts": {str(t): n for t, n in d.counts().items()},
            "properties": [
                {"name": n, "kind": d.properties.kinds[n]}
                for n in d.properties.names()
            ],
            "gradients": sorted(GRADIENTS),
            "max_id": d.max_id(),
        }

    @app.post("/api/stc")
    def start_build(req: BuildRequest):
        stc_id = _request_key(req)
        with store.lock:
            if stc_id in store.entries:
                return {"stc_id": stc_id}
            store.entries[stc_id] = _BuildEntry()

        def run():
            entry = store.entries[stc_id]
            try:
                volume = build_stc(
                    store.dataset,
                    req.plane.to_plane(),
                    req.resolution,
                    tuple(req.t_range) if req.t_range else None,
                )
                normals = compute_normals(volume)
                with store.lock:
                    entry.volume = volume
                    entry.normals = normals
                    entry.state = "ready"
            except Exception as exc:  # surfaced through the status endpoint
                with store.lock:
                    entry.error = str(exc)
                    entry.state = "failed"

        store.executor.submit(run)
        return {"stc_id": stc_id}

    @app.get("/api/stc/{stc_id}/status")
    def build_status(stc_id: str):
        with store.lock:
            entry = store.entries.get(stc_id)
        if entry is None:
            raise HTTPException(404, f"unknown stc_id {stc_id!r}")
        out = {"stc_id": stc_id, "state": entry.state}
        if entry.state == "failed":
            out["error"] = entry.error
        if entry.state == "ready" and entry.volume is not None:
            v = entry.volume
            out["shape"] = [v.width, v.height, v.depth]
            out["time_map"] = v.time_map.tolist()
        return out

    @app.post("/api/render")
    def render(req: RenderRequest):
        session = _session(req.session)
        grad = _gradient(session.active_gradient)
        vt = store.texture(session.active_property)
        style = req.style.to_style()
        cam = req.camera.to_camera()
        if req.view == "stc":
            entry = _entry(req.stc_id)
            img = render_stc(
                entry.volume, entry.normals, cam, style, session, vt, grad
            )
        else:
            t = req.time if req.time is not None else session.time_cursor
            if t not in store.dataset.time_steps:
                raise HTTPException(400, f"time {t} out of dataset range")
            overlay = None
            if req.overlay and req.stc_id:
                entry = _entry(req.stc_id)
                overlay = (entry.volume.plane, entry.volume.viewport)
            img = render_mesh_view(
                store.dataset, t, cam, session, vt, grad, style, overlay
            )
        return Response(content=encode_png(img), media_type="image/png")

    @app.post("/api/pick")
    def pick(req: PickRequest):
        session = _session(req.session)
        vt = store.texture(session.active_property)
        cam = req.camera.to_camera()
        px, py = req.pixel
        if not (0 <= px < cam.width and 0 <= py < cam.height):
            raise HTTPException(400, f"pixel {req.pixel} outside image")
        if req.view == "stc":
            entry = _entry(req.stc_id)
            hit = pick_stc(entry.volume, cam, (px, py), session, vt)
            if hit is None:
                return JSONResponse(None)
            obj, t = hit
        else:
            t = req.time if req.time is not None else session.time_cursor
            if t not in store.dataset.time_steps:
                raise HTTPException(400, f"time {t} out of dataset range")
            obj = pick_mesh(store.dataset, t, cam, (px, py), session, vt)
            if obj is None:
                return JSONResponse(None)
        return {"id": obj, "t": t, "summary": _summary(store.dataset, obj, t)}

    @app.get("/api/lineage/{obj}")
    def lineage(obj: int):
        latest = store.dataset.lineage.latest_instance(obj)
        if latest is None:
            raise HTTPException(404, f"unknown object {obj}")
        members = sorted(descendants(store.dataset.lineage, obj, latest[1]))
        return {
            "id": obj,
            "members": [[i, t] for i, t in members],
            "ids": sorted({i for i, _ in members}),
        }

    @app.get("/api/histogram/divisions")
    def histogram():
        hist = division_histogram(store.dataset.lineage)
        return {"histogram": [[t, c] for t, c in hist]}

    return app


def _summary(d: Dataset, obj: int, t: int) -> dict:
    props = {}
    for name in d.properties.names():
        value = property_value(d.properties, name, obj, t)
        props[name] = None if value is ABSENT else value
    lifespan = None
    if (obj, t) in d.lineage.nodes:
        ls = remaining_lifespan(d.lineage, obj, t)
        lifespan = {"steps": ls.steps, "censored": ls.censored}
    return {"properties": props, "lifespan": lifespan}

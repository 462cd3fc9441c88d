"""Deterministic synthetic datasets: mesh primitives and division-wave scenes.

Everything here is seeded; the same arguments always produce the same dataset,
which makes the generators usable as ground truth in tests and benchmarks.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .dataset import (
    CATEGORICAL,
    CONTINUOUS,
    Dataset,
    LineageTree,
    Mesh,
    PropertyTable,
    mesh_volume,
    save_obj,
)

_CUBE_FACES = np.array(
    [
        [0, 2, 1], [0, 3, 2],  # z-
        [4, 5, 6], [4, 6, 7],  # z+
        [0, 1, 5], [0, 5, 4],  # y-
        [2, 3, 7], [2, 7, 6],  # y+
        [0, 4, 7], [0, 7, 3],  # x-
        [1, 2, 6], [1, 6, 5],  # x+
    ],
    dtype=np.int32,
)


def unit_cube(center=(0.0, 0.0, 0.0), size: float = 1.0) -> Mesh:
    """Axis-aligned cube, outward counter-clockwise faces."""
    h = size / 2.0
    c = np.asarray(center, dtype=np.float64)
    corners = np.array(
        [
            [-h, -h, -h], [h, -h, -h], [h, h, -h], [-h, h, -h],
            [-h, -h, h], [h, -h, h], [h, h, h], [-h, h, h],
        ]
    )
    return Mesh(corners + c, _CUBE_FACES)


def _icosahedron() -> tuple[np.ndarray, np.ndarray]:
    t = (1.0 + math.sqrt(5.0)) / 2.0
    verts = np.array(
        [
            [-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
            [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
            [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1],
        ],
        dtype=np.float64,
    )
    faces = np.array(
        [
            [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
            [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
            [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
            [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
        ],
        dtype=np.int32,
    )
    verts /= np.linalg.norm(verts, axis=1, keepdims=True)
    return verts, faces


def icosphere(center=(0.0, 0.0, 0.0), radius: float = 1.0, subdivisions: int = 2) -> Mesh:
    """Geodesic sphere from a subdivided icosahedron, outward orientation."""
    verts, faces = _icosahedron()
    vlist = [tuple(v) for v in verts]
    for _ in range(subdivisions):
        cache: dict[tuple[int, int], int] = {}
        new_faces = []

        def midpoint(a: int, b: int) -> int:
            key = (a, b) if a < b else (b, a)
            if key in cache:
                return cache[key]
            m = np.array(vlist[a]) + np.array(vlist[b])
            m /= np.linalg.norm(m)
            vlist.append(tuple(m))
            cache[key] = len(vlist) - 1
            return cache[key]

        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]
        faces = np.array(new_faces, dtype=np.int32)
    verts = np.array(vlist, dtype=np.float64)
    return Mesh(verts * radius + np.asarray(center, dtype=np.float64), faces)


def make_wave_dataset(
    seed: int = 0,
    n_roots: int = 75,
    time_steps: int = 100,
    bursts: dict[int, int] | None = None,
    extent: float = 100.0,
    radius: float = 3.0,
    subdivisions: int = 2,
    name: str = "division-waves",
) -> Dataset:
    """Cells drifting in a box, with division bursts at chosen time steps.

    ``bursts`` maps step t to the number of tracks that divide there (children
    appear at t+1 under fresh IDs).  Defaults give 75 roots and bursts of 50
    at t=10 and 62 at t=30, so 299 distinct IDs over 100 steps.  Divisions
    happen only at burst steps, making the division histogram's ground truth
    exactly the ``bursts`` argument.
    """
    if bursts is None:
        bursts = {10: 50, 30: 62}
    rng = np.random.default_rng(seed)
    template = icosphere((0.0, 0.0, 0.0), 1.0, subdivisions)
    unit_vol = mesh_volume(template)

    tracks: list[dict] = []
    for i in range(n_roots):
        tracks.append(
            {
                "id": i + 1,
                "center": rng.uniform(radius, extent - radius, 3),
                "radius": radius,
                "gen": 0,
            }
        )
    next_id = n_roots + 1

    objects: dict[int, dict[int, Mesh]] = {t: {} for t in range(time_steps)}
    edges: set[tuple[tuple[int, int], tuple[int, int]]] = set()
    volumes: dict[tuple[int, int], float] = {}
    gens: dict[tuple[int, int], str] = {}

    for t in range(time_steps):
        for tr in tracks:
            objects[t][tr["id"]] = Mesh(
                template.vertices * tr["radius"] + tr["center"], template.triangles
            )
            volumes[(tr["id"], t)] = unit_vol * tr["radius"] ** 3
            gens[(tr["id"], t)] = f"gen{tr['gen']}"
        if t == time_steps - 1:
            break
        n_divide = min(bursts.get(t, 0), len(tracks))
        divide_idx = set(
            rng.choice(len(tracks), size=n_divide, replace=False).tolist()
        )
        new_tracks: list[dict] = []
        for k, tr in enumerate(tracks):
            if k in divide_idx:
                axis = rng.normal(size=3)
                axis /= np.linalg.norm(axis)
                child_r = tr["radius"] / 2.0 ** (1.0 / 3.0)
                for sign in (1.0, -1.0):
                    child = {
                        "id": next_id,
                        "center": tr["center"] + sign * axis * tr["radius"] * 0.5,
                        "radius": child_r,
                        "gen": tr["gen"] + 1,
                    }
                    next_id += 1
                    edges.add(((tr["id"], t), (child["id"], t + 1)))
                    new_tracks.append(child)
            else:
                edges.add(((tr["id"], t), (tr["id"], t + 1)))
                tr["center"] = tr["center"] + rng.normal(scale=0.15, size=3)
                new_tracks.append(tr)
        tracks = new_tracks

    properties = PropertyTable()
    properties.add("volume", CONTINUOUS, volumes)
    properties.add("generation", CATEGORICAL, gens)
    nodes = {(i, t) for t, per_t in objects.items() for i in per_t}
    return Dataset(
        name=name,
        units="um",
        time_steps=list(range(time_steps)),
        objects=objects,
        properties=properties,
        lineage=LineageTree(edges, nodes),
    )


def sphere_track_dataset(
    centers: np.ndarray,
    radius: float,
    subdivisions: int = 4,
    name: str = "sphere-track",
) -> Dataset:
    """Single sphere (ID 1) following the given per-step center path."""
    centers = np.asarray(centers, dtype=np.float64).reshape(-1, 3)
    template = icosphere((0.0, 0.0, 0.0), radius, subdivisions)
    unit_vol = mesh_volume(template)
    time_steps = list(range(len(centers)))
    objects = {
        t: {1: Mesh(template.vertices + centers[t], template.triangles)}
        for t in time_steps
    }
    edges = {((1, t), (1, t + 1)) for t in time_steps[:-1]}
    properties = PropertyTable()
    properties.add("volume", CONTINUOUS, {(1, t): unit_vol for t in time_steps})
    nodes = {(1, t) for t in time_steps}
    return Dataset(name, "um", time_steps, objects, properties, LineageTree(edges, nodes))


def write_dataset(d: Dataset, root: str | Path) -> Path:
    """Materialize a dataset to disk in the manifest layout.  Returns the manifest path."""
    import csv
    import json

    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    mesh_index: dict[str, dict[str, str]] = {}
    for t in d.time_steps:
        per_t = d.objects.get(t, {})
        if not per_t:
            continue
        tdir = root / "meshes" / f"t{t:03d}"
        tdir.mkdir(parents=True, exist_ok=True)
        mesh_index[str(t)] = {}
        for obj in sorted(per_t):
            rel = f"meshes/t{t:03d}/{obj}.obj"
            save_obj(per_t[obj], root / rel)
            mesh_index[str(t)][str(obj)] = rel

    with open(root / "props.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["property", "kind", "id", "t", "value"])
        for prop in d.properties.names():
            kind = d.properties.kinds[prop]
            for (obj, t), value in sorted(d.properties.values[prop].items()):
                out = repr(float(value)) if kind == CONTINUOUS else value
                writer.writerow([prop, kind, obj, t, out])

    with open(root / "lineage.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "t", "child_id"])
        for (pid, t), (cid, _) in sorted(d.lineage.edges):
            writer.writerow([pid, t, cid])

    manifest = {
        "name": d.name,
        "units": d.units,
        "time_steps": d.time_steps,
        "meshes": mesh_index,
        "properties": "props.csv",
        "lineage": "lineage.csv",
    }
    path = root / "manifest.json"
    path.write_text(json.dumps(manifest, indent=1), encoding="utf-8")
    return path

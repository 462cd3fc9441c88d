"""Time-varying segmented mesh datasets: loading, validation, and lineage queries.

A dataset couples per-object closed triangle meshes at each time step with a
property table (continuous or categorical values per object instance) and a
lineage tree tracking object identity across steps.  Everything is immutable
after load; queries are read-only.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple

import numpy as np

ObjectID = int
Node = tuple[int, int]  # (object id, time step)

CONTINUOUS = "continuous"
CATEGORICAL = "categorical"


class DatasetError(Exception):
    """Structural problem that makes a dataset unusable."""


class _Absent:
    __slots__ = ()

    def __repr__(self) -> str:
        return "ABSENT"


#: Sentinel returned for property lookups with no stored value.
ABSENT = _Absent()


class Mesh:
    """Triangle mesh with counter-clockwise outward orientation.

    Vertices are (n, 3) float64 in dataset length units, triangles (m, 3)
    int32 vertex indices.  Watertightness is not required (checked separately
    by :func:`validate`), but indices must be in range.
    """

    __slots__ = ("vertices", "triangles")

    def __init__(self, vertices, triangles):
        self.vertices = np.asarray(vertices, dtype=np.float64)
        self.triangles = np.asarray(triangles, dtype=np.int32)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 3:
            raise DatasetError(
                f"vertices must be (n, 3), got {self.vertices.shape}"
            )
        if self.triangles.ndim != 2 or self.triangles.shape[1] != 3:
            raise DatasetError(
                f"triangles must be (m, 3), got {self.triangles.shape}"
            )
        if self.triangles.size and (
            self.triangles.min() < 0 or self.triangles.max() >= len(self.vertices)
        ):
            raise DatasetError("triangle index out of range")

    def is_closed(self) -> bool:
        """True when every undirected edge is shared by exactly two triangles."""
        if len(self.triangles) == 0:
            return False
        tri = self.triangles
        edges = np.concatenate([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]])
        edges = np.sort(edges, axis=1)
        _, counts = np.unique(edges, axis=0, return_counts=True)
        return bool((counts == 2).all())


def mesh_volume(m: Mesh) -> float:
    """Signed volume via the divergence theorem (tetrahedron sum).

    Positive for closed meshes with outward orientation.  Vertices are
    recentered first so the result is translation-invariant to rounding.
    Open meshes produce a warning and an approximate value.
    """
    if not m.is_closed():
        warnings.warn("open mesh: volume is approximate", stacklevel=2)
    v = m.vertices - m.vertices.mean(axis=0)
    a = v[m.triangles[:, 0]]
    b = v[m.triangles[:, 1]]
    c = v[m.triangles[:, 2]]
    return float(np.einsum("ij,ij->i", a, np.cross(b, c)).sum() / 6.0)


@dataclass
class PropertyTable:
    """Per-property values keyed by (object id, time step)."""

    kinds: dict[str, str] = field(default_factory=dict)
    values: dict[str, dict[Node, float | str]] = field(default_factory=dict)

    def add(self, name: str, kind: str, entries: dict[Node, float | str]) -> None:
        if kind not in (CONTINUOUS, CATEGORICAL):
            raise DatasetError(f"unknown property kind {kind!r}")
        self.kinds[name] = kind
        self.values[name] = dict(entries)

    def names(self) -> list[str]:
        return sorted(self.kinds)


def property_value(p: PropertyTable, name: str, obj: ObjectID, t: int):
    """Stored value for (obj, t), or ABSENT.  Unknown property names raise."""
    if name not in p.kinds:
        raise KeyError(f"unknown property {name!r}")
    return p.values[name].get((obj, t), ABSENT)


class LineageTree:
    """Directed object-identity graph: edges go from (id, t) to (id', t+1).

    Nodes with two successors are divisions.  ``nodes`` contains every known
    object instance (including ones without any edge).
    """

    def __init__(
        self,
        edges: Iterable[tuple[Node, Node]] = (),
        nodes: Iterable[Node] = (),
        check: bool = True,
    ):
        self.edges: set[tuple[Node, Node]] = set(edges)
        self.nodes: set[Node] = set(nodes)
        self._succ: dict[Node, list[Node]] = {}
        for parent, child in sorted(self.edges):
            if check and child[1] != parent[1] + 1:
                raise DatasetError(
                    f"malformed lineage edge {parent} -> {child}: times not adjacent"
                )
            self.nodes.add(parent)
            self.nodes.add(child)
            self._succ.setdefault(parent, []).append(child)
        if check:
            for parent, succ in self._succ.items():
                if len(succ) > 2:
                    raise DatasetError(f"node {parent} has {len(succ)} successors")

    def successors(self, node: Node) -> tuple[Node, ...]:
        return tuple(self._succ.get(node, ()))

    def time_range(self) -> tuple[int, int]:
        if not self.nodes:
            raise DatasetError("empty lineage")
        times = [t for _, t in self.nodes]
        return min(times), max(times)

    def latest_instance(self, obj: ObjectID) -> Node | None:
        times = [t for i, t in self.nodes if i == obj]
        return (obj, max(times)) if times else None


class Lifespan(NamedTuple):
    steps: int
    censored: bool


def remaining_lifespan(l: LineageTree, obj: ObjectID, t: int) -> Lifespan:
    """Steps from (obj, t) until the first division along its own track.

    Censored when the track ends before any division.
    """
    node = (obj, t)
    if node not in l.nodes:
        raise KeyError(f"unknown lineage node {node}")
    steps = 0
    while True:
        succ = l.successors(node)
        if len(succ) == 2:
            return Lifespan(steps, False)
        if len(succ) == 0:
            return Lifespan(steps, True)
        node = succ[0]
        steps += 1


def descendants(l: LineageTree, obj: ObjectID, t: int) -> set[Node]:
    """Transitive closure of successor edges, including the query node."""
    start = (obj, t)
    if start not in l.nodes:
        raise KeyError(f"unknown lineage node {start}")
    seen = {start}
    frontier = [start]
    while frontier:
        node = frontier.pop()
        for child in l.successors(node):
            if child not in seen:
                seen.add(child)
                frontier.append(child)
    return seen


def divisions_at(l: LineageTree, t: int) -> list[ObjectID]:
    """IDs dividing at time t (exactly two successors), sorted."""
    lo, hi = l.time_range()
    if not (lo <= t and t + 1 <= hi):
        raise ValueError(f"time {t} out of lineage range [{lo}, {hi}]")
    return sorted(i for (i, tt) in l._succ if tt == t and len(l._succ[(i, tt)]) == 2)


def division_histogram(l: LineageTree) -> list[tuple[int, int]]:
    """(t, division count) for every t in the lineage time range but the last."""
    lo, hi = l.time_range()
    counts = {t: 0 for t in range(lo, hi)}
    for (_, t), succ in l._succ.items():
        if len(succ) == 2 and t in counts:
            counts[t] += 1
    return sorted(counts.items())


@dataclass
class Dataset:
    """Immutable time-indexed collection of meshes, properties, and lineage."""

    name: str
    units: str
    time_steps: list[int]
    objects: dict[int, dict[ObjectID, Mesh]]  # t -> id -> mesh
    properties: PropertyTable
    lineage: LineageTree

    def ids_at(self, t: int) -> list[ObjectID]:
        return sorted(self.objects.get(t, {}))

    def all_ids(self) -> list[ObjectID]:
        out: set[int] = set()
        for per_t in self.objects.values():
            out.update(per_t)
        return sorted(out)

    def max_id(self) -> int:
        ids = self.all_ids()
        return ids[-1] if ids else 0

    def mesh(self, obj: ObjectID, t: int) -> Mesh:
        return self.objects[t][obj]

    def counts(self) -> dict[int, int]:
        return {t: len(self.objects.get(t, {})) for t in self.time_steps}


@dataclass
class ValidationReport:
    errors: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    counts: dict[int, int] = field(default_factory=dict)

    @property
    def accepted(self) -> bool:
        return not self.errors


def validate(d: Dataset) -> ValidationReport:
    """Check watertightness, lineage consistency, and property references.

    Findings go in the report; nothing raises.  Open meshes and unknown
    property rows are warnings, lineage structure violations are errors.
    """
    report = ValidationReport(counts=d.counts())
    instances = {(i, t) for t, per_t in d.objects.items() for i in per_t}

    for t in d.time_steps:
        for obj in d.ids_at(t):
            if not d.objects[t][obj].is_closed():
                report.warnings.append(f"open mesh: object {obj} at t={t}")

    for parent, child in sorted(d.lineage.edges):
        if child[1] != parent[1] + 1:
            report.errors.append(
                f"lineage edge {parent} -> {child}: times not adjacent"
            )
        for node in (parent, child):
            if node not in instances:
                report.errors.append(f"dangling lineage node {node}")

    succ_count: dict[Node, int] = {}
    for parent, _ in d.lineage.edges:
        succ_count[parent] = succ_count.get(parent, 0) + 1
    for parent, n in sorted(succ_count.items()):
        if n > 2:
            report.errors.append(f"node {parent} has {n} successors")

    for name in d.properties.names():
        for (obj, t) in sorted(d.properties.values[name]):
            if (obj, t) not in instances:
                report.warnings.append(
                    f"property {name!r} row for unknown object ({obj}, {t})"
                )
    return report


def load_obj(path: Path) -> Mesh:
    """Parse a Wavefront-style ASCII mesh (v/f records, triangles only)."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    lines = text.split("\n")
    vtoks = [l.split()[1:4] for l in lines if l.startswith("v ")]
    ftoks = [l.split()[1:] for l in lines if l.startswith("f ")]
    if "/" in text:
        ftoks = [[p.partition("/")[0] for p in t] for t in ftoks]
    try:
        vertices = np.array(vtoks, dtype=np.float64)
        faces = np.array(ftoks, dtype=np.int64)
    except ValueError:
        return _load_obj_careful(path, lines)
    if vtoks and (vertices.ndim != 2 or vertices.shape[1] != 3):
        return _load_obj_careful(path, lines)
    if ftoks and (faces.ndim != 2 or faces.shape[1] != 3):
        return _load_obj_careful(path, lines)
    if faces.size and faces.min() < 1:
        raise DatasetError(f"{path}: face indices must be 1-based")
    return Mesh(
        vertices.reshape(-1, 3), faces.reshape(-1, 3) - 1 if faces.size else np.zeros((0, 3), np.int64)
    )


def _load_obj_careful(path: Path, lines: list[str]) -> Mesh:
    # slow path, only reached for malformed input: produce a line-number error
    for ln, line in enumerate(lines, 1):
        if line.startswith("v ") and len(line.split()) < 4:
            raise DatasetError(f"{path}:{ln}: malformed vertex record")
        if line.startswith("f "):
            tok = line.split()[1:]
            if len(tok) != 3:
                raise DatasetError(f"{path}:{ln}: only triangle faces are supported")
            for p in tok:
                try:
                    int(p.partition("/")[0])
                except ValueError as exc:
                    raise DatasetError(f"{path}:{ln}: bad face index {p!r}") from exc
    raise DatasetError(f"{path}: malformed mesh file")


def save_obj(mesh: Mesh, path: Path) -> None:
    # shortest-repr floats so write -> load round-trips bit-exactly
    lines = [f"v {x!r} {y!r} {z!r}" for x, y, z in mesh.vertices.tolist()]
    lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in mesh.triangles.tolist()]
    lines.append("")
    Path(path).write_text("\n".join(lines), encoding="utf-8")


def load_dataset(manifest_path: str | Path) -> Dataset:
    """Load a dataset from its JSON manifest.  Fails atomically on errors."""
    manifest_path = Path(manifest_path)
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DatasetError(f"cannot read manifest {manifest_path}: {exc}") from exc
    root = manifest_path.parent

    time_steps = list(manifest.get("time_steps", []))
    if not time_steps:
        raise DatasetError("manifest lists no time steps")
    if time_steps != list(range(time_steps[0], time_steps[0] + len(time_steps))):
        raise DatasetError("time steps must be contiguous and increasing")

    objects: dict[int, dict[int, Mesh]] = {t: {} for t in time_steps}
    for t_key, entries in manifest.get("meshes", {}).items():
        t = int(t_key)
        if t not in objects:
            raise DatasetError(f"mesh table references unknown time step {t}")
        for id_key, rel in entries.items():
            obj = int(id_key)
            if obj <= 0:
                raise DatasetError(f"object ids must be positive, got {obj}")
            if obj in objects[t]:
                raise DatasetError(f"duplicate object ({obj}, {t})")
            mesh_path = root / rel
            if not mesh_path.is_file():
                raise DatasetError(f"missing mesh {mesh_path}")
            objects[t][obj] = load_obj(mesh_path)

    properties = PropertyTable()
    prop_rel = manifest.get("properties")
    if prop_rel:
        _load_properties(root / prop_rel, properties)

    nodes = {(i, t) for t, per_t in objects.items() for i in per_t}
    edges: set[tuple[Node, Node]] = set()
    lineage_rel = manifest.get("lineage")
    if lineage_rel:
        edges = _load_lineage(root / lineage_rel, set(time_steps))
    lineage = LineageTree(edges, nodes)

    return Dataset(
        name=manifest.get("name", manifest_path.stem),
        units=manifest.get("units", ""),
        time_steps=time_steps,
        objects=objects,
        properties=properties,
        lineage=lineage,
    )


def _load_properties(path: Path, table: PropertyTable) -> None:
    if not path.is_file():
        raise DatasetError(f"missing property table {path}")
    staged: dict[str, tuple[str, dict[Node, float | str]]] = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"property", "kind", "id", "t", "value"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise DatasetError(f"{path}: header must contain {sorted(required)}")
        for ln, row in enumerate(reader, 2):
            name = row["property"]
            kind = row["kind"]
            key = (int(row["id"]), int(row["t"]))
            if name not in staged:
                staged[name] = (kind, {})
            elif staged[name][0] != kind:
                raise DatasetError(f"{path}:{ln}: property {name!r} changes kind")
            if key in staged[name][1]:
                raise DatasetError(f"{path}:{ln}: duplicate {name!r} row for {key}")
            if kind == CONTINUOUS:
                value: float | str = float(row["value"])
                if not math.isfinite(value):
                    raise DatasetError(f"{path}:{ln}: non-finite value for {key}")
            else:
                value = row["value"]
            staged[name][1][key] = value
    for name, (kind, entries) in staged.items():
        table.add(name, kind, entries)


def _load_lineage(path: Path, valid_times: set[int]) -> set[tuple[Node, Node]]:
    if not path.is_file():
        raise DatasetError(f"missing lineage table {path}")
    edges: set[tuple[Node, Node]] = set()
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"id", "t", "child_id"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise DatasetError(f"{path}: header must contain {sorted(required)}")
        for ln, row in enumerate(reader, 2):
            t = int(row["t"])
            if t not in valid_times or t + 1 not in valid_times:
                raise DatasetError(
                    f"{path}:{ln}: edge at t={t} outside dataset time range"
                )
            edge = ((int(row["id"]), t), (int(row["child_id"]), t + 1))
            if edge in edges:
                raise DatasetError(f"{path}:{ln}: duplicate lineage edge {edge}")
            edges.add(edge)
    return edges

"""Exploration session state and the shared visibility predicate.

One immutable SessionState drives both the STC render and the mesh view, so a
filter applied anywhere affects everywhere.  Setters return new snapshots;
in-flight renders keep whatever snapshot they started with.

``visible`` is a pure conjunction over independent filters, which makes
filter order irrelevant.  Masking always dominates.  The value and category
filters consult the active property's value texture: entries absent from the
texture fail an active value filter, and a category filter only passes
entries that carry one of the chosen labels.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Mapping

import numpy as np

from .dataset import LineageTree, ObjectID, descendants

if TYPE_CHECKING:
    from .render import ValueTexture

NORMAL = "normal"
HIGHLIGHTED = "highlighted"
MASKED = "masked"
_CYCLE = {NORMAL: HIGHLIGHTED, HIGHLIGHTED: MASKED, MASKED: NORMAL}
_STATES = frozenset(_CYCLE)


@dataclass(frozen=True)
class SessionState:
    """Filters, time focus, per-object states, and active colormap bindings.

    ``time_window`` bounds are inclusive; None means unbounded.  The value
    filter operates on normalized [0, 1] texture values.  ``object_states``
    maps ObjectID to normal / highlighted / masked; missing means normal.
    """

    value_filter: tuple[float, float] | None = None
    time_window: tuple[int, int] | None = None
    time_cursor: int = 0
    object_states: Mapping[ObjectID, str] = field(default_factory=dict)
    active_property: str | None = None
    active_gradient: str = "viridis"
    category_filter: frozenset[str] | None = None

    def state_of(self, obj: ObjectID) -> str:
        return self.object_states.get(obj, NORMAL)


def visible(
    s: SessionState, vt: ValueTexture | None, obj: ObjectID, t: int
) -> bool:
    """Single-instance visibility: the conjunction of every active filter."""
    if s.state_of(obj) == MASKED:
        return False
    if s.time_window is not None and not (
        s.time_window[0] <= t <= s.time_window[1]
    ):
        return False
    if s.value_filter is not None:
        if vt is None or not vt.has_value(obj, t):
            return False
        lo, hi = s.value_filter
        val = vt.value(obj, t)
        if not (lo <= val <= hi):
            return False
    if s.category_filter is not None:
        if vt is None:
            return False
        label = vt.label(obj, t)
        if label is None or label not in s.category_filter:
            return False
    return True


def visibility_lut(
    s: SessionState,
    vt: ValueTexture | None,
    max_id: int,
    time_map: np.ndarray,
) -> np.ndarray:
    """Dense (max_id + 1, depth) visibility table for the raycaster.

    Vectorized but defined elementwise by :func:`visible`:
    lut[i, k] == visible(s, vt, i, time_map[k]).  ID 0 (empty) stays 0.
    """
    time_map = np.asarray(time_map)
    depth = len(time_map)
    lut = np.ones((max_id + 1, depth), dtype=np.uint8)
    lut[0] = 0

    for obj, state in s.object_states.items():
        if state == MASKED and 0 <= obj <= max_id:
            lut[obj] = 0
    if s.time_window is not None:
        ta, tb = s.time_window
        lut[:, ~((time_map >= ta) & (time_map <= tb))] = 0

    if s.value_filter is not None or s.category_filter is not None:
        if vt is None:
            lut[1:] = 0
            return lut
        present = vt.present_grid(max_id, time_map)  # (max_id+1, depth) bool
        if s.value_filter is not None:
            lo, hi = s.value_filter
            vals = vt.value_grid(max_id, time_map)
            ok = present & (vals >= lo) & (vals <= hi)
            lut[1:] &= ok[1:].astype(np.uint8)
        if s.category_filter is not None:
            ok = vt.label_mask(max_id, time_map, s.category_filter)
            lut[1:] &= ok[1:].astype(np.uint8)
    return lut


def cycle_object_state(
    s: SessionState, obj: ObjectID, lineage: LineageTree
) -> SessionState:
    """Advance obj through normal -> highlighted -> masked -> normal.

    The new state also lands on every descendant of the object's latest
    instance, so acting on a divided cell carries to its daughter lines.
    """
    latest = lineage.latest_instance(obj)
    if latest is None:
        raise KeyError(f"unknown object {obj}")
    new_state = _CYCLE[s.state_of(obj)]
    affected = {i for i, _ in descendants(lineage, obj, latest[1])}
    affected.add(obj)
    states = dict(s.object_states)
    for i in affected:
        if new_state == NORMAL:
            states.pop(i, None)
        else:
            states[i] = new_state
    return replace(s, object_states=states)


def set_time_window(s: SessionState, t_a: int, t_b: int) -> SessionState:
    if t_a > t_b:
        raise ValueError(f"inverted time window [{t_a}, {t_b}]")
    cursor = min(max(s.time_cursor, t_a), t_b)
    return replace(s, time_window=(int(t_a), int(t_b)), time_cursor=cursor)


def clear_time_window(s: SessionState) -> SessionState:
    return replace(s, time_window=None)


def set_time_cursor(s: SessionState, t: int) -> SessionState:
    if s.time_window is not None:
        t = min(max(t, s.time_window[0]), s.time_window[1])
    return replace(s, time_cursor=int(t))


def set_value_filter(
    s: SessionState, lo: float | None, hi: float | None = None
) -> SessionState:
    if lo is None:
        return replace(s, value_filter=None)
    if hi is None or not (0.0 <= lo <= hi <= 1.0):
        raise ValueError(f"value filter must satisfy 0 <= lo <= hi <= 1, got [{lo}, {hi}]")
    return replace(s, value_filter=(float(lo), float(hi)))


def set_category_filter(
    s: SessionState, labels: frozenset[str] | set[str] | None
) -> SessionState:
    if labels is None:
        return replace(s, category_filter=None)
    return replace(s, category_filter=frozenset(labels))


def set_property(s: SessionState, name: str | None) -> SessionState:
    return replace(s, active_property=name)


def set_gradient(s: SessionState, name: str) -> SessionState:
    return replace(s, active_gradient=name)


def session_to_json(s: SessionState) -> dict:
    """Wire form: plain JSON types, lower_snake_case keys."""
    return {
        "value_filter": list(s.value_filter) if s.value_filter else None,
        "time_window": list(s.time_window) if s.time_window else None,
        "time_cursor": s.time_cursor,
        "object_states": {str(k): v for k, v in sorted(s.object_states.items())},
        "active_property": s.active_property,
        "active_gradient": s.active_gradient,
        "category_filter": (
            sorted(s.category_filter) if s.category_filter is not None else None
        ),
    }


def session_from_json(data: dict) -> SessionState:
    """Parse and validate the wire form; raises ValueError on bad input."""
    if not isinstance(data, dict):
        raise ValueError("session must be a JSON object")
    vf = data.get("value_filter")
    if vf is not None:
        if len(vf) != 2 or not (0.0 <= vf[0] <= vf[1] <= 1.0):
            raise ValueError(f"bad value_filter {vf}")
        vf = (float(vf[0]), float(vf[1]))
    tw = data.get("time_window")
    if tw is not None:
        if len(tw) != 2 or tw[0] > tw[1]:
            raise ValueError(f"bad time_window {tw}")
        tw = (int(tw[0]), int(tw[1]))
    states = {}
    for key, value in (data.get("object_states") or {}).items():
        if value not in _STATES:
            raise ValueError(f"bad object state {value!r}")
        states[int(key)] = value
    cf = data.get("category_filter")
    cursor = int(data.get("time_cursor", 0))
    if tw is not None:
        cursor = min(max(cursor, tw[0]), tw[1])
    return SessionState(
        value_filter=vf,
        time_window=tw,
        time_cursor=cursor,
        object_states=states,
        active_property=data.get("active_property"),
        active_gradient=data.get("active_gradient", "viridis"),
        category_filter=frozenset(cf) if cf is not None else None,
    )


def session_dumps(s: SessionState) -> str:
    return json.dumps(session_to_json(s), sort_keys=True)

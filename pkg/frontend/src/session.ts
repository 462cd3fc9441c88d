/** Client-side mirror of the server session.
 *
 * The client never evaluates visibility itself; it only edits this state
 * and ships it with every render and pick request.  Setters clamp to the
 * same invariants the server enforces, so a round trip through the wire
 * format is lossless and never bounces with a 400.
 */

import type { ObjectStateWire, SessionWire } from "./wire.js";

export type ObjectState = ObjectStateWire;

export interface Session {
  valueFilter: [number, number] | null;
  timeWindow: [number, number] | null;
  timeCursor: number;
  objectStates: Map<number, ObjectState>;
  activeProperty: string | null;
  activeGradient: string;
  categoryFilter: Set<string> | null;
}

export function freshSession(): Session {
  return {
    valueFilter: null,
    timeWindow: null,
    timeCursor: 0,
    objectStates: new Map(),
    activeProperty: null,
    activeGradient: "viridis",
    categoryFilter: null,
  };
}

const clamp = (x: number, lo: number, hi: number) => Math.min(Math.max(x, lo), hi);

/** Value filter ends clamp into [0, 1]; a handle dragged past the other end
 * stops at it instead of inverting the interval. */
export function setValueFilter(s: Session, lo: number | null, hi?: number): void {
  if (lo === null) {
    s.valueFilter = null;
    return;
  }
  let a = clamp(lo, 0, 1);
  let b = clamp(hi ?? a, 0, 1);
  if (a > b) a = b;
  s.valueFilter = [a, b];
}

/** Window clamps into the dataset time range and stays ordered; the cursor
 * follows it so it can never point outside the window. */
export function setTimeWindow(
  s: Session, a: number | null, b: number, range: [number, number],
): void {
  if (a === null) {
    s.timeWindow = null;
    return;
  }
  let lo = clamp(Math.round(a), range[0], range[1]);
  let hi = clamp(Math.round(b), range[0], range[1]);
  if (lo > hi) lo = hi;
  s.timeWindow = [lo, hi];
  s.timeCursor = clamp(s.timeCursor, lo, hi);
}

export function setTimeCursor(s: Session, t: number, range: [number, number]): void {
  const [lo, hi] = s.timeWindow ?? range;
  s.timeCursor = clamp(Math.round(t), lo, hi);
}

export function setCategoryFilter(s: Session, labels: string[] | null): void {
  s.categoryFilter = labels === null ? null : new Set(labels);
}

const CYCLE: Record<ObjectState, ObjectState> = {
  normal: "highlighted",
  highlighted: "masked",
  masked: "normal",
};

export function nextState(s: Session, id: number): ObjectState {
  return CYCLE[s.objectStates.get(id) ?? "normal"];
}

/** Apply one state to a whole set of ids; "normal" removes the entries. */
export function applyState(s: Session, ids: number[], state: ObjectState): void {
  for (const id of ids) {
    if (state === "normal") s.objectStates.delete(id);
    else s.objectStates.set(id, state);
  }
}

export function toWire(s: Session): SessionWire {
  const states: Record<string, ObjectState> = {};
  for (const id of [...s.objectStates.keys()].sort((x, y) => x - y)) {
    states[String(id)] = s.objectStates.get(id)!;
  }
  return {
    value_filter: s.valueFilter ? [s.valueFilter[0], s.valueFilter[1]] : null,
    time_window: s.timeWindow ? [s.timeWindow[0], s.timeWindow[1]] : null,
    time_cursor: s.timeCursor,
    object_states: states,
    active_property: s.activeProperty,
    active_gradient: s.activeGradient,
    category_filter: s.categoryFilter ? [...s.categoryFilter].sort() : null,
  };
}

export function fromWire(w: SessionWire): Session {
  const s = freshSession();
  s.valueFilter = w.value_filter ? [w.value_filter[0], w.value_filter[1]] : null;
  s.timeWindow = w.time_window ? [w.time_window[0], w.time_window[1]] : null;
  s.timeCursor = w.time_cursor;
  for (const [k, v] of Object.entries(w.object_states)) {
    s.objectStates.set(Number(k), v);
  }
  s.activeProperty = w.active_property;
  s.activeGradient = w.active_gradient;
  s.categoryFilter = w.category_filter ? new Set(w.category_filter) : null;
  return s;
}

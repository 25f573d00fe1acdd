/**
 * Annotation workbench view state and its transitions.
 *
 * Pure data in, new state out: the canvas layer renders whatever is here and
 * feeds clicks/keys back through these functions, which keeps the whole
 * workflow unit-testable without a DOM.
 *
 * Workflow per building: two clicks mark the shadow (start, tip); an
 * optional second pair marks a vertical edge, stored but never used for
 * height display. Escape cancels pending clicks, Backspace undoes the last
 * one, Tab advances to the next unannotated box. Service errors surface in
 * a banner and keep pending clicks so the annotator can correct and resend.
 */

import type { AnnotationResult, Box } from "./api.js";
import type { Point } from "./transform.js";

export interface ViewState {
  boxes: Box[];
  selected: number;
  /** Shadow clicks pending submission: 0, 1, or 2 points. */
  pending: Point[];
  /** Optional vertical-edge clicks, collected after the shadow pair. */
  verticalPending: Point[];
  collectVertical: boolean;
  annotated: Map<number, AnnotationResult>;
  banner: string | null;
}

export function initialState(boxes: Box[], cursor = 0): ViewState {
  return {
    boxes,
    selected: boxes.length > 0 ? Math.min(cursor, boxes.length - 1) : 0,
    pending: [],
    verticalPending: [],
    collectVertical: false,
    annotated: new Map(),
    banner: null,
  };
}

export function shadowReady(state: ViewState): boolean {
  return state.pending.length === 2;
}

export function verticalEdgePx(state: ViewState): number | undefined {
  if (state.verticalPending.length !== 2) return undefined;
  const [a, b] = state.verticalPending as [Point, Point];
  return Math.hypot(b.x - a.x, b.y - a.y);
}

/** Register a click in image coordinates. */
export function addClick(state: ViewState, p: Point): ViewState {
  if (state.boxes.length === 0) return state;
  if (!shadowReady(state)) {
    return { ...state, pending: [...state.pending, p], banner: null };
  }
  if (state.collectVertical && state.verticalPending.length < 2) {
    return { ...state, verticalPending: [...state.verticalPending, p] };
  }
  return state; // both pairs complete: clicks ignored until submit/cancel
}

/** Backspace: undo the most recent pending click. */
export function undoClick(state: ViewState): ViewState {
  if (state.verticalPending.length > 0) {
    return { ...state, verticalPending: state.verticalPending.slice(0, -1) };
  }
  if (state.pending.length > 0) {
    return { ...state, pending: state.pending.slice(0, -1) };
  }
  return state;
}

/** Escape: drop all pending clicks for the current building. */
export function cancelPending(state: ViewState): ViewState {
  return { ...state, pending: [], verticalPending: [], banner: null };
}

export function toggleVerticalCollection(state: ViewState): ViewState {
  return { ...state, collectVertical: !state.collectVertical };
}

function nextUnannotated(state: ViewState, from: number): number {
  const n = state.boxes.length;
  if (n === 0) return 0;
  for (let step = 1; step <= n; step++) {
    const i = (from + step) % n;
    if (!state.annotated.has(i)) return i;
  }
  return Math.min(from, n - 1); // everything annotated: stay in range
}

/** Tab: advance the selection, skipping already-annotated boxes. */
export function advanceSelection(state: ViewState): ViewState {
  return {
    ...state,
    selected: nextUnannotated(state, state.selected),
    pending: [],
    verticalPending: [],
  };
}

/** A successful service response: record it and move to the next building. */
export function applyResult(state: ViewState, result: AnnotationResult): ViewState {
  const annotated = new Map(state.annotated);
  annotated.set(state.selected, result);
  const next = { ...state, annotated, banner: null };
  return {
    ...next,
    selected: nextUnannotated(next, state.selected),
    pending: [],
    verticalPending: [],
  };
}

/** A rejected submission: show the banner, keep the clicks for correction. */
export function applyError(state: ViewState, message: string): ViewState {
  return { ...state, banner: message };
}

export function runningMeanAbsError(state: ViewState): number | null {
  const errors: number[] = [];
  for (const result of state.annotated.values()) {
    if (result.abs_error_m !== undefined) errors.push(result.abs_error_m);
  }
  if (errors.length === 0) return null;
  return errors.reduce((a, b) => a + b, 0) / errors.length;
}

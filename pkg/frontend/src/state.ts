/**
 * UI session state: a value reconstructible from the service summary at
 * any time (refresh-safe — the server is the single source of truth).
 */

import type { BindingEditor } from "./binding.js";
import { emptyEditor, fromJson } from "./binding.js";
import type { SessionSummary, SkeletonBlock, TransferConfigJson } from "./types.js";

/** Mirrors the service's transfer-config defaults, one control each. */
export const DEFAULT_CONFIG: TransferConfigJson = {
  alpha: 0.85,
  patch_size: 11,
  step: 1,
  iterations: 3,
  pyramid_levels: 3,
  feature_mode: "rotation6d",
  seed: 0,
  normalize: true,
  keyframe_mask: null,
};

export interface UiState {
  sessionId: string | null;
  source: SkeletonBlock | null;
  target: SkeletonBlock | null;
  nTargets: number;
  editor: BindingEditor;
  config: TransferConfigJson;
  hasResult: boolean;
  /** Playback cursor in fractional frames, always within [0, sourceFrames). */
  cursor: number;
  /** True while a transfer request is in flight (at most one). */
  busy: boolean;
}

export function initialState(): UiState {
  return {
    sessionId: null,
    source: null,
    target: null,
    nTargets: 0,
    editor: emptyEditor(),
    config: { ...DEFAULT_CONFIG },
    hasResult: false,
    cursor: 0,
    busy: false,
  };
}

/** Rebuild the whole UI state from a service summary (refresh, reload). */
export function fromSummary(summary: SessionSummary, previous?: UiState): UiState {
  const state: UiState = {
    sessionId: summary.id,
    source: summary.source,
    target: summary.target,
    nTargets: summary.n_targets,
    editor: summary.bindings ? fromJson(summary.bindings) : emptyEditor(),
    config: { ...summary.config },
    hasResult: summary.has_result,
    cursor: previous ? previous.cursor : 0,
    busy: previous ? previous.busy : false,
  };
  state.cursor = clampCursor(state, state.cursor);
  return state;
}

export function clampCursor(state: UiState, frame: number): number {
  const frames = state.source ? state.source.frames : 0;
  if (frames <= 0 || !Number.isFinite(frame)) return 0;
  return Math.min(Math.max(frame, 0), frames - 1e-9);
}

/** Transfer needs inputs, at least one pair, and no job in flight. */
export function canTransfer(state: UiState): boolean {
  return (
    state.source !== null &&
    state.nTargets > 0 &&
    state.editor.pairs.length > 0 &&
    !state.busy
  );
}

/** Why the transfer button is disabled, or null when it is enabled. */
export function transferBlocker(state: UiState): string | null {
  if (state.busy) return "a transfer is already running";
  if (state.source === null) return "upload a source clip first";
  if (state.nTargets === 0) return "upload at least one target example";
  if (state.editor.pairs.length === 0) return "bind at least one joint pair";
  return null;
}

export function beginTransfer(state: UiState): UiState {
  if (state.busy) throw new Error("a transfer is already in flight");
  return { ...state, busy: true };
}

export function finishTransfer(state: UiState, hasResult: boolean): UiState {
  return { ...state, busy: false, hasResult };
}

/** Steering controls freeze while a job runs. */
export function controlsEnabled(state: UiState): boolean {
  return !state.busy;
}

/** Viewer state and its pure transitions; the DOM layer only dispatches these. */

import type { Axis, SegmentationParams, SegmentationSummary, VolumeMeta } from './api.js';
import { DEFAULT_PARAMS } from './api.js';
import { clampSliceIndex, clickToMm, mmInBounds, sliceCount, type Geometry } from './coords.js';

export interface SegmentationReadout {
  id: string;
  volumeMm3: number;
  runtimeMs: Record<string, number>;
  degenerate: boolean;
}

export interface ViewerState {
  volume: VolumeMeta | null;
  axis: Axis;
  sliceIndex: number;
  window: number;
  level: number;
  seedMm: [number, number, number] | null;
  params: SegmentationParams;
  lastSegmentation: SegmentationReadout | null;
  overlayVisible: boolean;
  pending: boolean;
}

export function initialState(): ViewerState {
  return {
    volume: null,
    axis: 'z',
    sliceIndex: 0,
    window: 1,
    level: 0.5,
    seedMm: null,
    params: { ...DEFAULT_PARAMS },
    lastSegmentation: null,
    overlayVisible: false,
    pending: false,
  };
}

export function geometryOf(state: ViewerState): Geometry {
  if (!state.volume) throw new Error('no volume open');
  return {
    dims: state.volume.dims,
    spacing: state.volume.spacing,
    origin: state.volume.origin,
  };
}

/** A fresh upload resets everything: middle axial slice, full-range window. */
export function withVolume(state: ViewerState, meta: VolumeMeta): ViewerState {
  const window = Math.max(meta.gray_max - meta.gray_min, 1e-9);
  return {
    ...initialState(),
    volume: meta,
    axis: 'z',
    sliceIndex: Math.floor(meta.dims[2] / 2),
    window,
    level: (meta.gray_max + meta.gray_min) / 2,
    params: { ...state.params },
  };
}

export function setAxis(state: ViewerState, axis: Axis): ViewerState {
  if (!state.volume) return state;
  const index = clampSliceIndex(geometryOf(state), axis,
                                Math.floor(sliceCount(geometryOf(state), axis) / 2));
  return { ...state, axis, sliceIndex: index };
}

export function setSlice(state: ViewerState, index: number): ViewerState {
  if (!state.volume) return state;
  return { ...state, sliceIndex: clampSliceIndex(geometryOf(state), state.axis, index) };
}

export function setWindowLevel(state: ViewerState, window: number, level: number): ViewerState {
  return { ...state, window: Math.max(window, 1e-9), level };
}

export function setParams(state: ViewerState, params: Partial<SegmentationParams>): ViewerState {
  return { ...state, params: { ...state.params, ...params } };
}

/** Clicks outside the image area are ignored; a new seed replaces the old. */
export function placeSeed(state: ViewerState, px: number, py: number): ViewerState {
  if (!state.volume) return state;
  const mm = clickToMm(geometryOf(state), state.axis, state.sliceIndex, px, py);
  if (mm === null || !mmInBounds(geometryOf(state), mm)) return state;
  return { ...state, seedMm: mm };
}

export function canRun(state: ViewerState): boolean {
  return state.volume !== null && state.seedMm !== null && !state.pending;
}

export function canToggleOverlay(state: ViewerState): boolean {
  return state.lastSegmentation !== null;
}

export function toggleOverlay(state: ViewerState): ViewerState {
  if (!canToggleOverlay(state)) return state;
  return { ...state, overlayVisible: !state.overlayVisible };
}

export function beginRun(state: ViewerState): ViewerState {
  return { ...state, pending: true };
}

export function applySegmentation(state: ViewerState, summary: SegmentationSummary): ViewerState {
  return {
    ...state,
    pending: false,
    overlayVisible: true,
    lastSegmentation: {
      id: summary.id,
      volumeMm3: summary.volume_mm3,
      runtimeMs: summary.runtime_ms,
      degenerate: summary.degenerate,
    },
  };
}

export function failRun(state: ViewerState): ViewerState {
  return { ...state, pending: false };
}

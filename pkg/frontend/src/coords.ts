/** Slice geometry: canvas pixels <-> voxel indices <-> world millimetres.
 *
 * Slice images follow the service convention: columns run along the first
 * remaining axis in (x, y, z) order, rows along the second. So an axial (z)
 * slice has x as columns and y as rows.
 */

import type { Axis } from './api.js';

export interface Geometry {
  dims: [number, number, number];
  spacing: [number, number, number];
  origin: [number, number, number];
}

const AXIS_INDEX: Record<Axis, number> = { x: 0, y: 1, z: 2 };

export function sliceAxes(axis: Axis): { col: number; row: number; depth: number } {
  const depth = AXIS_INDEX[axis];
  const remaining = [0, 1, 2].filter((a) => a !== depth);
  return { col: remaining[0], row: remaining[1], depth };
}

export function sliceShape(geom: Geometry, axis: Axis): { cols: number; rows: number } {
  const { col, row } = sliceAxes(axis);
  return { cols: geom.dims[col], rows: geom.dims[row] };
}

export function sliceCount(geom: Geometry, axis: Axis): number {
  return geom.dims[AXIS_INDEX[axis]];
}

export function clampSliceIndex(geom: Geometry, axis: Axis, index: number): number {
  return Math.min(Math.max(index, 0), sliceCount(geom, axis) - 1);
}

export function pixelToVoxel(axis: Axis, sliceIndex: number,
                             px: number, py: number): [number, number, number] {
  const { col, row, depth } = sliceAxes(axis);
  const voxel: [number, number, number] = [0, 0, 0];
  voxel[col] = px;
  voxel[row] = py;
  voxel[depth] = sliceIndex;
  return voxel;
}

export function voxelToMm(geom: Geometry, voxel: [number, number, number]):
    [number, number, number] {
  return [0, 1, 2].map((a) => geom.origin[a] + voxel[a] * geom.spacing[a]) as
    [number, number, number];
}

export function mmToVoxel(geom: Geometry, mm: [number, number, number]):
    [number, number, number] {
  return [0, 1, 2].map((a) => Math.round((mm[a] - geom.origin[a]) / geom.spacing[a])) as
    [number, number, number];
}

export function voxelInBounds(geom: Geometry, voxel: [number, number, number]): boolean {
  return voxel.every((v, a) => v >= 0 && v < geom.dims[a]);
}

export function mmInBounds(geom: Geometry, mm: [number, number, number]): boolean {
  return [0, 1, 2].every((a) => {
    const g = (mm[a] - geom.origin[a]) / geom.spacing[a];
    return g >= 0 && g <= geom.dims[a] - 1;
  });
}

/** World position of a click on the displayed slice; null outside the image. */
export function clickToMm(geom: Geometry, axis: Axis, sliceIndex: number,
                          px: number, py: number): [number, number, number] | null {
  const { cols, rows } = sliceShape(geom, axis);
  const ix = Math.floor(px);
  const iy = Math.floor(py);
  if (ix < 0 || iy < 0 || ix >= cols || iy >= rows) return null;
  return voxelToMm(geom, pixelToVoxel(axis, sliceIndex, ix, iy));
}

/** Pixel position of a world point on the displayed slice, if it lies there. */
export function mmToPixel(geom: Geometry, axis: Axis, sliceIndex: number,
                          mm: [number, number, number]):
    { px: number; py: number; onSlice: boolean } {
  const voxel = mmToVoxel(geom, mm);
  const { col, row, depth } = sliceAxes(axis);
  return { px: voxel[col], py: voxel[row], onSlice: voxel[depth] === sliceIndex };
}

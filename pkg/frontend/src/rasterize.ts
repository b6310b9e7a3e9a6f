/** Client-side stroke rasterization.
 *
 * Strokes are recorded as in-plane sample points and expanded to a
 * deduplicated voxel list before being posted as a single edit op, so the
 * server never needs to know about brush geometry. Deterministic for a
 * recorded pointer path: same samples, same radius, same voxels in the same
 * order.
 */

import type { Axis, Voxel } from "./types.js";

export interface PlanePoint {
  row: number;
  col: number;
}

/** Integer disc offsets with dr^2 + dc^2 < radius^2 (radius 1 = single cell). */
export function discOffsets(radius: number): Array<[number, number]> {
  const r = Math.max(1, Math.floor(radius));
  const out: Array<[number, number]> = [];
  for (let dr = -r + 1; dr <= r - 1; dr++) {
    for (let dc = -r + 1; dc <= r - 1; dc++) {
      if (dr * dr + dc * dc < r * r) out.push([dr, dc]);
    }
  }
  return out;
}

/** Interpolate between consecutive samples so fast pointer moves leave no gaps. */
export function densifyPath(points: PlanePoint[], step = 0.5): PlanePoint[] {
  if (points.length <= 1) return points.slice();
  const out: PlanePoint[] = [points[0]];
  for (let i = 1; i < points.length; i++) {
    const a = points[i - 1];
    const b = points[i];
    const dist = Math.hypot(b.row - a.row, b.col - a.col);
    const n = Math.max(1, Math.ceil(dist / step));
    for (let k = 1; k <= n; k++) {
      out.push({ row: a.row + ((b.row - a.row) * k) / n, col: a.col + ((b.col - a.col) * k) / n });
    }
  }
  return out;
}

/** Expand a pointer path to deduplicated in-plane cells, first-touch order. */
export function rasterizeStroke(
  points: PlanePoint[],
  radius: number,
  rows: number,
  cols: number,
): PlanePoint[] {
  const offsets = discOffsets(radius);
  const seen = new Set<number>();
  const cells: PlanePoint[] = [];
  for (const p of densifyPath(points)) {
    const row0 = Math.round(p.row);
    const col0 = Math.round(p.col);
    for (const [dr, dc] of offsets) {
      const row = row0 + dr;
      const col = col0 + dc;
      if (row < 0 || row >= rows || col < 0 || col >= cols) continue;
      const key = row * cols + col;
      if (seen.has(key)) continue;
      seen.add(key);
      cells.push({ row, col });
    }
  }
  return cells;
}

/** Map in-plane cells to (z, y, x) voxels for the viewed axis and slice.
 * Plane layout matches the server slices: z -> (y, x), y -> (z, x), x -> (z, y). */
export function cellsToVoxels(cells: PlanePoint[], axis: Axis, sliceIndex: number): Voxel[] {
  return cells.map(({ row, col }) => {
    switch (axis) {
      case "z":
        return [sliceIndex, row, col];
      case "y":
        return [row, sliceIndex, col];
      case "x":
        return [row, col, sliceIndex];
    }
  });
}

/** Plane dimensions (rows, cols) of a slice through a (Z, Y, X) volume. */
export function planeShape(
  shape: [number, number, number],
  axis: Axis,
): { rows: number; cols: number } {
  const [z, y, x] = shape;
  if (axis === "z") return { rows: y, cols: x };
  if (axis === "y") return { rows: z, cols: x };
  return { rows: z, cols: y };
}

import { describe, expect, it } from "vitest";

import { cellsToVoxels, densifyPath, discOffsets, planeShape, rasterizeStroke } from "./rasterize.js";

describe("discOffsets", () => {
  it("radius 1 is a single cell", () => {
    expect(discOffsets(1)).toEqual([[0, 0]]);
  });

  it("radius 2 is the 3x3 block (all offsets with norm^2 < 4)", () => {
    expect(discOffsets(2)).toHaveLength(9);
  });

  it("radius 3 keeps near corners, radius 4 drops the far ones", () => {
    expect(discOffsets(3)).toHaveLength(25); // |(2,2)|^2 = 8 < 9
    const cells = discOffsets(4);
    expect(cells).toHaveLength(45); // 7x7 square minus the four |(3,3)| corners
    expect(cells).not.toContainEqual([3, 3]);
    expect(cells).toContainEqual([3, 2]);
  });
});

describe("rasterizeStroke", () => {
  it("zero-length click with radius 1 is a single voxel", () => {
    const cells = rasterizeStroke([{ row: 5, col: 7 }], 1, 20, 20);
    expect(cells).toEqual([{ row: 5, col: 7 }]);
  });

  it("deduplicates overlapping disc stamps", () => {
    const cells = rasterizeStroke(
      [
        { row: 5, col: 5 },
        { row: 5, col: 6 },
      ],
      2,
      20,
      20,
    );
    const keys = cells.map((c) => `${c.row},${c.col}`);
    expect(new Set(keys).size).toBe(keys.length);
    expect(cells.length).toBe(12); // 3x3 stamp advanced by one column
  });

  it("is deterministic for a recorded pointer path", () => {
    const path = [
      { row: 2.2, col: 3.7 },
      { row: 4.9, col: 8.1 },
      { row: 4.9, col: 12.4 },
    ];
    const a = rasterizeStroke(path, 3, 32, 32);
    const b = rasterizeStroke(path, 3, 32, 32);
    expect(a).toEqual(b);
  });

  it("clips to the plane bounds", () => {
    const cells = rasterizeStroke([{ row: 0, col: 0 }], 3, 10, 10);
    expect(cells.every((c) => c.row >= 0 && c.col >= 0)).toBe(true);
  });

  it("leaves no gaps on fast pointer moves", () => {
    const cells = rasterizeStroke(
      [
        { row: 0, col: 0 },
        { row: 0, col: 9 },
      ],
      1,
      10,
      10,
    );
    expect(cells.map((c) => c.col).sort((x, y) => x - y)).toEqual([0, 1, 2, 3, 4, 5, 6, 7, 8, 9]);
  });
});

describe("densifyPath", () => {
  it("keeps endpoints and bounds the step", () => {
    const out = densifyPath([
      { row: 0, col: 0 },
      { row: 0, col: 2 },
    ]);
    expect(out[0]).toEqual({ row: 0, col: 0 });
    expect(out[out.length - 1]).toEqual({ row: 0, col: 2 });
    for (let i = 1; i < out.length; i++) {
      const d = Math.hypot(out[i].row - out[i - 1].row, out[i].col - out[i - 1].col);
      expect(d).toBeLessThanOrEqual(0.5 + 1e-9);
    }
  });
});

describe("cellsToVoxels", () => {
  const cells = [{ row: 4, col: 9 }];

  it("maps plane coordinates per axis", () => {
    expect(cellsToVoxels(cells, "z", 7)).toEqual([[7, 4, 9]]);
    expect(cellsToVoxels(cells, "y", 7)).toEqual([[4, 7, 9]]);
    expect(cellsToVoxels(cells, "x", 7)).toEqual([[4, 9, 7]]);
  });
});

describe("planeShape", () => {
  it("matches the server slice layout", () => {
    expect(planeShape([10, 20, 30], "z")).toEqual({ rows: 20, cols: 30 });
    expect(planeShape([10, 20, 30], "y")).toEqual({ rows: 10, cols: 30 });
    expect(planeShape([10, 20, 30], "x")).toEqual({ rows: 10, cols: 20 });
  });
});

import { describe, expect, it } from "vitest";

import { compositeLayers, mipProject, windowMap, type LayerBuffer } from "./compositor.js";

describe("windowMap", () => {
  it("matches the server raw-layer contract", () => {
    expect(windowMap(0.0, 0, 1)).toBe(0);
    expect(windowMap(1.0, 0, 1)).toBe(255);
    expect(windowMap(0.8, 0, 1)).toBe(204);
  });

  it("clamps outside the window: <= low black, >= high white", () => {
    expect(windowMap(0.1, 0.2, 0.6)).toBe(0);
    expect(windowMap(0.2, 0.2, 0.6)).toBe(0);
    expect(windowMap(0.6, 0.2, 0.6)).toBe(255);
    expect(windowMap(0.9, 0.2, 0.6)).toBe(255);
  });

  it("degenerate window renders black", () => {
    expect(windowMap(0.5, 1, 1)).toBe(0);
  });
});

function rgba(pixels: number[][]): Uint8ClampedArray {
  return new Uint8ClampedArray(pixels.flat());
}

describe("compositeLayers", () => {
  it("stacks raw, seg, unc in order with source-over alpha", () => {
    const raw: LayerBuffer = { data: rgba([[100, 100, 100, 255]]), opacity: 1, visible: true };
    const seg: LayerBuffer = { data: rgba([[255, 0, 0, 255]]), opacity: 1, visible: true };
    const unc: LayerBuffer = { data: rgba([[255, 255, 0, 204]]), opacity: 1, visible: true };
    const out = compositeLayers([raw, seg, unc], 1);
    // seg fully covers raw; unc at alpha 204/255 over red
    const a = 204 / 255;
    expect(out[0]).toBe(Math.round(255 * a + 255 * (1 - a)));
    expect(out[1]).toBe(Math.round(255 * a + 0 * (1 - a)));
    expect(out[2]).toBe(0);
    expect(out[3]).toBe(255);
  });

  it("skips hidden layers", () => {
    const raw: LayerBuffer = { data: rgba([[90, 90, 90, 255]]), opacity: 1, visible: true };
    const seg: LayerBuffer = { data: rgba([[255, 0, 0, 255]]), opacity: 1, visible: false };
    const out = compositeLayers([raw, seg], 1);
    expect([out[0], out[1], out[2]]).toEqual([90, 90, 90]);
  });

  it("applies layer opacity on top of pixel alpha", () => {
    const base: LayerBuffer = { data: rgba([[0, 0, 0, 255]]), opacity: 1, visible: true };
    const half: LayerBuffer = { data: rgba([[200, 200, 200, 255]]), opacity: 0.5, visible: true };
    const out = compositeLayers([base, half], 1);
    expect(out[0]).toBe(100);
  });

  it("transparent background pixels leave the base untouched", () => {
    const raw: LayerBuffer = { data: rgba([[70, 70, 70, 255]]), opacity: 1, visible: true };
    const seg: LayerBuffer = { data: rgba([[255, 0, 0, 0]]), opacity: 1, visible: true };
    const out = compositeLayers([raw, seg], 1);
    expect([out[0], out[1], out[2]]).toEqual([70, 70, 70]);
  });
});

describe("mipProject", () => {
  it("takes the per-pixel maximum across slices", () => {
    const s1 = rgba([
      [10, 10, 10, 255],
      [200, 200, 200, 255],
    ]);
    const s2 = rgba([
      [90, 90, 90, 255],
      [50, 50, 50, 255],
    ]);
    const out = mipProject([s1, s2], 2);
    expect(out[0]).toBe(90);
    expect(out[4]).toBe(200);
    expect(out[3]).toBe(255);
  });

  it("is order-invariant", () => {
    const s1 = rgba([[10, 10, 10, 255]]);
    const s2 = rgba([[250, 250, 250, 255]]);
    expect(mipProject([s1, s2], 1)).toEqual(mipProject([s2, s1], 1));
  });
});

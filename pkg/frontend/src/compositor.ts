/** Pure pixel math for the slice viewer.
 *
 * The server owns the bit-exact layer encodings; this module only combines
 * already-decoded RGBA buffers for display (layer order raw -> seg -> unc),
 * applies the raw window mapping for client-rendered projections, and
 * computes the maximum-intensity projection used as the 3D stand-in.
 */

export interface LayerBuffer {
  /** RGBA, 4 bytes per pixel. */
  data: Uint8ClampedArray;
  opacity: number; // 0..1
  visible: boolean;
}

/** Server contract for the raw layer: round(255 * clip((v-lo)/(hi-lo), 0, 1)). */
export function windowMap(value: number, low: number, high: number): number {
  if (!(high > low)) return 0;
  const t = (value - low) / (high - low);
  return Math.round(255 * Math.min(1, Math.max(0, t)));
}

/** Source-over blend of layers in the given order onto an opaque black base. */
export function compositeLayers(layers: LayerBuffer[], nPixels: number): Uint8ClampedArray<ArrayBuffer> {
  const out = new Uint8ClampedArray(nPixels * 4);
  for (let i = 0; i < nPixels; i++) out[i * 4 + 3] = 255;
  for (const layer of layers) {
    if (!layer.visible || layer.opacity <= 0) continue;
    const src = layer.data;
    for (let i = 0; i < nPixels; i++) {
      const o = i * 4;
      const alpha = (src[o + 3] / 255) * layer.opacity;
      if (alpha <= 0) continue;
      out[o] = Math.round(src[o] * alpha + out[o] * (1 - alpha));
      out[o + 1] = Math.round(src[o + 1] * alpha + out[o + 1] * (1 - alpha));
      out[o + 2] = Math.round(src[o + 2] * alpha + out[o + 2] * (1 - alpha));
      out[o + 3] = 255;
    }
  }
  return out;
}

/** Per-pixel max across decoded grayscale slices; the "3D" projection view. */
export function mipProject(slices: Uint8ClampedArray[], nPixels: number): Uint8ClampedArray<ArrayBuffer> {
  const out = new Uint8ClampedArray(nPixels * 4);
  for (let i = 0; i < nPixels; i++) out[i * 4 + 3] = 255;
  for (const slice of slices) {
    for (let i = 0; i < nPixels; i++) {
      const o = i * 4;
      const v = slice[o]; // grayscale: R == G == B
      if (v > out[o]) {
        out[o] = v;
        out[o + 1] = v;
        out[o + 2] = v;
      }
    }
  }
  return out;
}

/** Canvas slice viewer: composites server-rendered layers (raw under seg
 * under unc), scroll-wheel slice navigation, brush stroke capture, region
 * bbox highlight, and a client-side maximum-intensity projection toggle.
 *
 * Every displayed segmentation voxel comes from a server slice fetched at the
 * latest acknowledged seq; the client never recomputes segmentation state.
 */

import { ApiClient } from "./api.js";
import { mipProject } from "./compositor.js";
import { planeShape, rasterizeStroke, type PlanePoint } from "./rasterize.js";
import { axisLength, clampSlice, type ViewState } from "./state.js";
import type { BBox, LayerName } from "./types.js";

export interface ViewerHooks {
  onStroke: (cells: PlanePoint[]) => void;
  onSliceChange: (index: number) => void;
}

const LAYER_ORDER: LayerName[] = ["raw", "seg", "unc"];

export class SliceViewer {
  readonly canvas: HTMLCanvasElement;
  private readonly api: ApiClient;
  private readonly state: ViewState;
  private readonly hooks: ViewerHooks;
  private highlight: BBox | null = null;
  private stroke: PlanePoint[] | null = null;
  private generation = 0;

  constructor(canvas: HTMLCanvasElement, api: ApiClient, state: ViewState, hooks: ViewerHooks) {
    this.canvas = canvas;
    this.api = api;
    this.state = state;
    this.hooks = hooks;
    canvas.addEventListener("wheel", (e) => {
      e.preventDefault();
      this.hooks.onSliceChange(clampSlice(this.state, this.state.sliceIndex + Math.sign(e.deltaY)));
    });
    canvas.addEventListener("pointerdown", (e) => {
      canvas.setPointerCapture(e.pointerId);
      this.stroke = [this.eventCell(e)];
    });
    canvas.addEventListener("pointermove", (e) => {
      if (this.stroke) this.stroke.push(this.eventCell(e));
    });
    canvas.addEventListener("pointerup", () => {
      if (!this.stroke) return;
      const { rows, cols } = planeShape(this.state.shape, this.state.axis);
      const cells = rasterizeStroke(this.stroke, this.state.brush.radius, rows, cols);
      this.stroke = null;
      if (cells.length) this.hooks.onStroke(cells);
    });
  }

  setHighlight(bbox: BBox | null): void {
    this.highlight = bbox;
  }

  private eventCell(e: PointerEvent): PlanePoint {
    const rect = this.canvas.getBoundingClientRect();
    const col = ((e.clientX - rect.left) / rect.width) * this.canvas.width;
    const row = ((e.clientY - rect.top) / rect.height) * this.canvas.height;
    return { row, col };
  }

  private loadLayer(layer: LayerName, index: number): Promise<HTMLImageElement> {
    return new Promise((resolve, reject) => {
      const img = new Image();
      img.crossOrigin = "anonymous";
      img.onload = () => resolve(img);
      img.onerror = () => reject(new Error(`failed to fetch ${layer} slice ${index}`));
      img.src = this.api.sliceUrl(
        this.state.datasetId,
        this.state.axis,
        index,
        layer,
        this.state.lastSeq,
        layer === "raw" ? this.state.window : undefined,
      );
    });
  }

  /** Re-fetch and draw the current slice (or the MIP when toggled). */
  async refresh(): Promise<void> {
    const gen = ++this.generation;
    const { rows, cols } = planeShape(this.state.shape, this.state.axis);
    this.canvas.width = cols;
    this.canvas.height = rows;
    const ctx = this.canvas.getContext("2d");
    if (!ctx) return;

    if (this.state.mip) {
      await this.drawMip(ctx, rows, cols, gen);
    } else {
      for (const layer of LAYER_ORDER) {
        const config = this.state.layers[layer];
        if (!config.visible) continue;
        const img = await this.loadLayer(layer, this.state.sliceIndex);
        if (gen !== this.generation) return; // superseded by a newer refresh
        ctx.globalAlpha = config.opacity;
        ctx.drawImage(img, 0, 0);
      }
      if (this.state.layers.region_labels.visible) {
        const img = await this.loadLayer("region_labels", this.state.sliceIndex);
        if (gen !== this.generation) return;
        ctx.globalAlpha = this.state.layers.region_labels.opacity;
        ctx.drawImage(img, 0, 0);
      }
      ctx.globalAlpha = 1;
    }
    this.drawHighlight(ctx);
  }

  private async drawMip(
    ctx: CanvasRenderingContext2D,
    rows: number,
    cols: number,
    gen: number,
  ): Promise<void> {
    const n = axisLength(this.state.shape, this.state.axis);
    const scratch = document.createElement("canvas");
    scratch.width = cols;
    scratch.height = rows;
    const sctx = scratch.getContext("2d");
    if (!sctx) return;
    const buffers: Uint8ClampedArray[] = [];
    for (let i = 0; i < n; i++) {
      const img = await this.loadLayer("raw", i);
      if (gen !== this.generation) return;
      sctx.clearRect(0, 0, cols, rows);
      sctx.drawImage(img, 0, 0);
      buffers.push(sctx.getImageData(0, 0, cols, rows).data);
    }
    const projected = mipProject(buffers, rows * cols);
    ctx.putImageData(new ImageData(projected, cols, rows), 0, 0);
  }

  private drawHighlight(ctx: CanvasRenderingContext2D): void {
    if (!this.highlight) return;
    const [lo, hi] = this.highlight;
    let rect: [number, number, number, number];
    if (this.state.axis === "z") rect = [lo[2], lo[1], hi[2] - lo[2] + 1, hi[1] - lo[1] + 1];
    else if (this.state.axis === "y") rect = [lo[2], lo[0], hi[2] - lo[2] + 1, hi[0] - lo[0] + 1];
    else rect = [lo[1], lo[0], hi[1] - lo[1] + 1, hi[0] - lo[0] + 1];
    ctx.globalAlpha = 1;
    ctx.strokeStyle = "#00e5ff";
    ctx.lineWidth = 1;
    ctx.strokeRect(rect[0] - 0.5, rect[1] - 0.5, rect[2] + 1, rect[3] + 1);
  }
}

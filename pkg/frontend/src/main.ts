/** Application wiring: ranked queue -> slice inspection -> brush edit ->
 * Done-and-advance -> export. Configured via URL query (?dataset=id). */

import { ApiClient, ApiError } from "./api.js";
import { RegionQueuePanel } from "./queue.js";
import { cellsToVoxels, type PlanePoint } from "./rasterize.js";
import {
  MutationQueue,
  axisLength,
  clampSlice,
  describeDiff,
  initialViewState,
  type ViewState,
} from "./state.js";
import { ToastHost } from "./toast.js";
import type { Axis, RegionDetail } from "./types.js";
import { SliceViewer } from "./viewer.js";

export interface AppElements {
  queue: HTMLElement;
  canvas: HTMLCanvasElement;
  toast: HTMLElement;
  banner: HTMLElement;
  status: HTMLElement;
  sliceLabel: HTMLElement;
  doneButton: HTMLButtonElement;
  undoButton: HTMLButtonElement;
  exportLink: HTMLAnchorElement;
  brushMode: HTMLSelectElement;
  brushRadius: HTMLInputElement;
  axisSelect: HTMLSelectElement;
  windowLow: HTMLInputElement;
  windowHigh: HTMLInputElement;
  mipToggle: HTMLInputElement;
}

export class CurationApp {
  readonly api: ApiClient;
  readonly els: AppElements;
  state!: ViewState;
  queuePanel!: RegionQueuePanel;
  viewer!: SliceViewer;
  mutations!: MutationQueue;
  toasts!: ToastHost;
  private doneInFlight = false;

  constructor(api: ApiClient, els: AppElements) {
    this.api = api;
    this.els = els;
  }

  async start(datasetId: string | null): Promise<void> {
    this.toasts = new ToastHost(this.els.toast);
    const datasets = await this.api.listDatasets();
    if (datasets.length === 0) {
      this.els.status.textContent = "No datasets on the server.";
      return;
    }
    const chosen = datasets.find((d) => d.id === datasetId) ?? datasets[0];
    this.state = initialViewState(chosen.id, chosen.shape);
    this.state.lastSeq = (await this.api.getState(chosen.id)).seq;

    this.queuePanel = new RegionQueuePanel(this.els.queue, {
      onSelect: (regionId) => void this.selectRegion(regionId),
    });
    this.viewer = new SliceViewer(this.els.canvas, this.api, this.state, {
      onStroke: (cells) => void this.applyStroke(cells),
      onSliceChange: (index) => void this.goToSlice(index),
    });
    this.mutations = new MutationQueue(this.api, this.state, () => {
      this.toasts.show("Server state changed underneath you; re-apply your edit.", "error");
      void this.syncAll();
    });

    this.bindControls();
    this.bindKeyboard();
    this.els.exportLink.href = this.api.exportUrl(this.state.datasetId);
    await this.syncAll();
    const regions = this.queuePanel.items;
    if (regions.length > 0) await this.selectRegion(regions[0].region_id);
  }

  /** Re-pull regions + state; keeps working after a server restart. */
  async syncAll(): Promise<void> {
    try {
      const [regions, state] = await Promise.all([
        this.api.listRegions(this.state.datasetId),
        this.api.getState(this.state.datasetId),
      ]);
      this.state.lastSeq = state.seq;
      this.queuePanel.render(regions.slice(), this.state.currentRegionId);
      this.els.banner.hidden = true;
      this.els.status.textContent =
        `${this.state.datasetId}: ${state.n_done}/${state.n_regions} regions done, seq ${state.seq}`;
      this.els.exportLink.hidden = !(state.n_regions > 0 && state.n_done === state.n_regions);
      await this.viewer.refresh();
    } catch (err) {
      this.els.banner.hidden = false;
      this.els.banner.textContent = "Connection lost — retrying keeps your place.";
      throw err;
    }
  }

  async selectRegion(regionId: number): Promise<void> {
    const detail: RegionDetail = await this.api.getRegion(this.state.datasetId, regionId);
    this.state.currentRegionId = regionId;
    this.state.sliceIndex = clampSlice(this.state, detail.recommended_view[this.state.axis]);
    this.viewer.setHighlight(detail.bbox);
    try {
      await this.api.postInspect(this.state.datasetId, regionId);
    } catch {
      // inspect marking is best-effort; never blocks navigation
    }
    await this.syncAll();
    this.updateSliceLabel();
  }

  async applyStroke(cells: PlanePoint[]): Promise<void> {
    const voxels = cellsToVoxels(cells, this.state.axis, this.state.sliceIndex);
    try {
      const response = await this.mutations.submitEdit(
        this.state.brush.mode,
        voxels,
        this.state.currentRegionId,
      );
      this.toasts.show(describeDiff(response.local_topology_diff.classification));
      await this.syncAll();
    } catch (err) {
      if (err instanceof ApiError && err.status !== 409) {
        this.toasts.show(`edit rejected: ${err.message}`, "error");
      }
    }
  }

  async undo(): Promise<void> {
    try {
      await this.mutations.submitUndo();
      await this.syncAll();
    } catch (err) {
      if (err instanceof ApiError) this.toasts.show(err.message, "error");
    }
  }

  /** Done on the current region; advances to the server-chosen next region. */
  async markDone(): Promise<void> {
    if (this.doneInFlight || this.state.currentRegionId === null) return;
    this.doneInFlight = true;
    this.els.doneButton.disabled = true;
    try {
      const response = await this.mutations.submitDone(this.state.currentRegionId);
      if (response.next_region !== null) {
        await this.selectRegion(response.next_region);
      } else {
        this.state.currentRegionId = null;
        this.viewer.setHighlight(null);
        await this.syncAll();
        this.toasts.show("All regions done — export is ready.");
      }
    } catch (err) {
      if (err instanceof ApiError) this.toasts.show(err.message, "error");
    } finally {
      this.doneInFlight = false;
      this.els.doneButton.disabled = false;
    }
  }

  async goToSlice(index: number): Promise<void> {
    this.state.sliceIndex = clampSlice(this.state, index);
    this.updateSliceLabel();
    await this.viewer.refresh();
  }

  private updateSliceLabel(): void {
    const n = axisLength(this.state.shape, this.state.axis);
    this.els.sliceLabel.textContent = `${this.state.axis} ${this.state.sliceIndex + 1}/${n}`;
  }

  private bindControls(): void {
    this.els.doneButton.addEventListener("click", () => void this.markDone());
    this.els.undoButton.addEventListener("click", () => void this.undo());
    this.els.brushMode.addEventListener("change", () => {
      this.state.brush.mode = this.els.brushMode.value as "paint" | "erase";
    });
    this.els.brushRadius.addEventListener("change", () => {
      this.state.brush.radius = Math.max(1, Number(this.els.brushRadius.value));
    });
    this.els.axisSelect.addEventListener("change", () => {
      this.state.axis = this.els.axisSelect.value as Axis;
      this.state.sliceIndex = clampSlice(this.state, Math.floor(axisLength(this.state.shape, this.state.axis) / 2));
      this.updateSliceLabel();
      void this.viewer.refresh();
    });
    const applyWindow = () => {
      const low = Number(this.els.windowLow.value);
      const high = Number(this.els.windowHigh.value);
      if (high > low) {
        this.state.window = [low, high];
        void this.viewer.refresh();
      }
    };
    this.els.windowLow.addEventListener("change", applyWindow);
    this.els.windowHigh.addEventListener("change", applyWindow);
    this.els.mipToggle.addEventListener("change", () => {
      this.state.mip = this.els.mipToggle.checked;
      void this.viewer.refresh();
    });
  }

  private bindKeyboard(): void {
    document.addEventListener("keydown", (e) => {
      if (e.target instanceof HTMLInputElement || e.target instanceof HTMLSelectElement) return;
      switch (e.key) {
        case "ArrowUp":
          void this.goToSlice(this.state.sliceIndex - 1);
          break;
        case "ArrowDown":
          void this.goToSlice(this.state.sliceIndex + 1);
          break;
        case "j":
          this.queuePanel.moveHighlight(1);
          break;
        case "k":
          this.queuePanel.moveHighlight(-1);
          break;
        case "Enter":
          this.queuePanel.selectHighlighted();
          break;
        case "p":
          this.state.brush.mode = "paint";
          this.els.brushMode.value = "paint";
          break;
        case "e":
          this.state.brush.mode = "erase";
          this.els.brushMode.value = "erase";
          break;
        case "u":
          void this.undo();
          break;
        case "d":
          void this.markDone();
          break;
        case "m":
          this.state.mip = !this.state.mip;
          this.els.mipToggle.checked = this.state.mip;
          void this.viewer.refresh();
          break;
      }
    });
  }
}

export function collectElements(doc: Document): AppElements {
  const get = <T extends HTMLElement>(id: string): T => {
    const el = doc.getElementById(id);
    if (!el) throw new Error(`missing element #${id}`);
    return el as T;
  };
  return {
    queue: get("queue"),
    canvas: get<HTMLCanvasElement>("viewer"),
    toast: get("toasts"),
    banner: get("banner"),
    status: get("status"),
    sliceLabel: get("slice-label"),
    doneButton: get<HTMLButtonElement>("done-btn"),
    undoButton: get<HTMLButtonElement>("undo-btn"),
    exportLink: get<HTMLAnchorElement>("export-link"),
    brushMode: get<HTMLSelectElement>("brush-mode"),
    brushRadius: get<HTMLInputElement>("brush-radius"),
    axisSelect: get<HTMLSelectElement>("axis-select"),
    windowLow: get<HTMLInputElement>("window-low"),
    windowHigh: get<HTMLInputElement>("window-high"),
    mipToggle: get<HTMLInputElement>("mip-toggle"),
  };
}

export function bootstrap(): void {
  const params = new URLSearchParams(window.location.search);
  const api = new ApiClient(params.get("api") ?? "");
  const app = new CurationApp(api, collectElements(document));
  void app.start(params.get("dataset"));
}

if (typeof window !== "undefined" && typeof document !== "undefined" && document.getElementById("viewer")) {
  bootstrap();
}

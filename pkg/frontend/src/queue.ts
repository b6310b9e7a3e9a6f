/** Ranked region queue panel: the server's rank order, status badges, and
 * click-to-navigate. Selection is keyboard-reachable (j/k + Enter). */

import type { RegionRecord } from "./types.js";

export interface QueueCallbacks {
  onSelect: (regionId: number) => void;
}

export class RegionQueuePanel {
  private readonly root: HTMLElement;
  private readonly callbacks: QueueCallbacks;
  private regions: RegionRecord[] = [];
  private highlighted = 0; // index into regions for keyboard navigation

  constructor(root: HTMLElement, callbacks: QueueCallbacks) {
    this.root = root;
    this.callbacks = callbacks;
  }

  get items(): readonly RegionRecord[] {
    return this.regions;
  }

  allDone(): boolean {
    return this.regions.length > 0 && this.regions.every((r) => r.status === "done");
  }

  render(regions: RegionRecord[], currentRegionId: number | null): void {
    this.regions = regions;
    this.root.textContent = "";
    if (regions.length === 0) {
      const empty = document.createElement("div");
      empty.className = "queue-empty";
      empty.textContent = "No regions above threshold.";
      this.root.appendChild(empty);
      return;
    }
    if (this.allDone()) {
      const done = document.createElement("div");
      done.className = "queue-complete";
      done.textContent = "All regions done — ready to export.";
      this.root.appendChild(done);
    }
    const list = document.createElement("ul");
    list.className = "region-list";
    regions.forEach((region, i) => {
      const item = document.createElement("li");
      item.dataset.regionId = String(region.region_id);
      item.className = "region-item";
      if (region.region_id === currentRegionId) item.classList.add("current");
      if (i === this.highlighted) item.classList.add("highlighted");
      item.classList.add(`status-${region.status}`);

      const score = document.createElement("span");
      score.className = "score";
      score.textContent = region.score.toFixed(3);
      const size = document.createElement("span");
      size.className = "size";
      size.textContent = `${region.voxel_count} vx`;
      const badge = document.createElement("span");
      badge.className = "badge";
      badge.textContent = region.status;

      item.append(`#${region.region_id} `, score, " ", size, " ", badge);
      item.addEventListener("click", () => this.callbacks.onSelect(region.region_id));
      list.appendChild(item);
    });
    this.root.appendChild(list);
  }

  moveHighlight(delta: number): void {
    if (this.regions.length === 0) return;
    this.highlighted = Math.min(
      this.regions.length - 1,
      Math.max(0, this.highlighted + delta),
    );
    const items = this.root.querySelectorAll(".region-item");
    items.forEach((el, i) => el.classList.toggle("highlighted", i === this.highlighted));
  }

  selectHighlighted(): void {
    const region = this.regions[this.highlighted];
    if (region) this.callbacks.onSelect(region.region_id);
  }
}

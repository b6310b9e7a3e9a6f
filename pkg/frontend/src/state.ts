/** Client view state and the single-writer mutation queue.
 *
 * The client never computes segmentation state: every mutation goes through
 * MutationQueue (one in-flight request at a time, optimistic expected_seq),
 * and after each acknowledged seq the viewer refetches its slices.
 */

import { ApiClient, ApiError } from "./api.js";
import type { Axis, BrushMode, EditResponse, Voxel } from "./types.js";

export interface ViewState {
  datasetId: string;
  shape: [number, number, number];
  axis: Axis;
  sliceIndex: number;
  layers: Record<"raw" | "seg" | "unc" | "region_labels", { visible: boolean; opacity: number }>;
  brush: { mode: BrushMode; radius: number };
  window: [number, number];
  currentRegionId: number | null;
  lastSeq: number;
  mip: boolean;
}

export function initialViewState(datasetId: string, shape: [number, number, number]): ViewState {
  return {
    datasetId,
    shape,
    axis: "z",
    sliceIndex: Math.floor(shape[0] / 2),
    layers: {
      raw: { visible: true, opacity: 1 },
      seg: { visible: true, opacity: 0.85 },
      unc: { visible: true, opacity: 1 },
      region_labels: { visible: false, opacity: 0.6 },
    },
    brush: { mode: "erase", radius: 2 },
    window: [0, 1],
    currentRegionId: null,
    lastSeq: 0,
    mip: false,
  };
}

export function axisLength(shape: [number, number, number], axis: Axis): number {
  return axis === "z" ? shape[0] : axis === "y" ? shape[1] : shape[2];
}

export function clampSlice(state: ViewState, index: number): number {
  return Math.min(axisLength(state.shape, state.axis) - 1, Math.max(0, index));
}

export type StaleHandler = (currentSeq: number) => void;

/** Serializes mutations: at most one in flight, the rest queued in order. */
export class MutationQueue {
  private readonly api: ApiClient;
  private readonly state: ViewState;
  private readonly onStale: StaleHandler;
  private chain: Promise<unknown> = Promise.resolve();
  private pending = 0;

  constructor(api: ApiClient, state: ViewState, onStale: StaleHandler) {
    this.api = api;
    this.state = state;
    this.onStale = onStale;
  }

  get inFlight(): boolean {
    return this.pending > 0;
  }

  private enqueue<T>(task: () => Promise<T>): Promise<T> {
    this.pending += 1;
    const next = this.chain.then(task);
    this.chain = next.catch(() => undefined).finally(() => {
      this.pending -= 1;
    });
    return next;
  }

  /** Post one stroke as a single edit op. On a stale seq the server state is
   * re-synced and the caller is told to re-apply (ApiError propagates). */
  submitEdit(kind: BrushMode, voxels: Voxel[], regionId: number | null): Promise<EditResponse> {
    return this.enqueue(async () => {
      try {
        const response = await this.api.postEdit(
          this.state.datasetId,
          kind,
          voxels,
          regionId,
          this.state.lastSeq,
        );
        this.state.lastSeq = response.seq;
        return response;
      } catch (err) {
        if (err instanceof ApiError && err.status === 409) {
          const fresh = await this.api.getState(this.state.datasetId);
          this.state.lastSeq = fresh.seq;
          this.onStale(fresh.seq);
        }
        throw err;
      }
    });
  }

  submitUndo(): Promise<{ seq: number }> {
    return this.enqueue(async () => {
      const response = await this.api.postUndo(this.state.datasetId);
      this.state.lastSeq = response.seq;
      return response;
    });
  }

  submitDone(regionId: number): Promise<{ seq: number; next_region: number | null }> {
    return this.enqueue(async () => {
      const response = await this.api.postDone(this.state.datasetId, regionId);
      this.state.lastSeq = response.seq;
      return response;
    });
  }
}

/** Human-readable toast for a topology diff, per the Fig-2 interaction. */
export function describeDiff(classification: string): string {
  switch (classification) {
    case "split":
      return "split: vessels separated";
    case "join":
      return "join: break repaired";
    case "loop_change":
      return "loop count changed";
    case "cavity_change":
      return "cavity count changed";
    case "mixed":
      return "mixed topology change";
    default:
      return "no topology change";
  }
}

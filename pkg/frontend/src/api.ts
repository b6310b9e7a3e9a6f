/** Typed client for the uqcure service. All state lives server-side; this
 * module only shapes requests and decodes responses. */

import type {
  Axis,
  BrushMode,
  DatasetSummary,
  DoneResponse,
  EditResponse,
  LayerName,
  RegionDetail,
  RegionRecord,
  SessionState,
  TopologyReport,
  Voxel,
} from "./types.js";

export class ApiError extends Error {
  readonly status: number;
  readonly code: string;

  constructor(status: number, code: string, message: string) {
    super(message);
    this.status = status;
    this.code = code;
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  readonly base: string;
  private readonly fetchFn: FetchLike;

  constructor(base = "", fetchFn: FetchLike = (...args) => fetch(...args)) {
    this.base = base.replace(/\/$/, "");
    this.fetchFn = fetchFn;
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.base + path, init);
    if (!response.ok) {
      let code = "http_error";
      let message = `${response.status} ${response.statusText}`;
      try {
        const body = (await response.json()) as { code?: string; message?: string };
        if (body.code) code = body.code;
        if (body.message) message = body.message;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, code, message);
    }
    return (await response.json()) as T;
  }

  listDatasets(): Promise<DatasetSummary[]> {
    return this.request("/datasets");
  }

  listRegions(datasetId: string): Promise<RegionRecord[]> {
    return this.request(`/datasets/${encodeURIComponent(datasetId)}/regions`);
  }

  getRegion(datasetId: string, regionId: number): Promise<RegionDetail> {
    return this.request(`/datasets/${encodeURIComponent(datasetId)}/regions/${regionId}`);
  }

  getState(datasetId: string): Promise<SessionState> {
    return this.request(`/datasets/${encodeURIComponent(datasetId)}/state`);
  }

  getTopology(datasetId: string): Promise<TopologyReport> {
    return this.request(`/datasets/${encodeURIComponent(datasetId)}/topology`);
  }

  /** URL of a slice PNG; seq is appended so caches roll over after edits. */
  sliceUrl(
    datasetId: string,
    axis: Axis,
    index: number,
    layer: LayerName,
    seq: number,
    window?: [number, number],
  ): string {
    const params = new URLSearchParams({
      axis,
      index: String(index),
      layer,
      seq: String(seq),
    });
    if (window) params.set("window", `${window[0]},${window[1]}`);
    return `${this.base}/datasets/${encodeURIComponent(datasetId)}/slice?${params}`;
  }

  postEdit(
    datasetId: string,
    kind: BrushMode,
    voxels: Voxel[],
    regionId: number | null,
    expectedSeq: number,
  ): Promise<EditResponse> {
    return this.request(`/datasets/${encodeURIComponent(datasetId)}/edits`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({
        kind,
        voxels,
        region_id: regionId,
        expected_seq: expectedSeq,
      }),
    });
  }

  postUndo(datasetId: string): Promise<{ seq: number }> {
    return this.request(`/datasets/${encodeURIComponent(datasetId)}/undo`, { method: "POST" });
  }

  postDone(datasetId: string, regionId: number): Promise<DoneResponse> {
    return this.request(
      `/datasets/${encodeURIComponent(datasetId)}/regions/${regionId}/done`,
      { method: "POST" },
    );
  }

  postInspect(datasetId: string, regionId: number): Promise<{ region_id: number }> {
    return this.request(
      `/datasets/${encodeURIComponent(datasetId)}/regions/${regionId}/inspect`,
      { method: "POST" },
    );
  }

  exportUrl(datasetId: string): string {
    return `${this.base}/datasets/${encodeURIComponent(datasetId)}/export`;
  }
}

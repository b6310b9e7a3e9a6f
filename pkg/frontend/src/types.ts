/** Wire types for the uqcure HTTP API. */

export type Axis = "z" | "y" | "x";
export type LayerName = "raw" | "seg" | "unc" | "region_labels";
export type BrushMode = "paint" | "erase";
export type RegionStatus = "pending" | "inspected" | "edited" | "done";

export type Voxel = [number, number, number]; // z, y, x
export type BBox = [Voxel, Voxel]; // inclusive min/max corners

export interface DatasetSummary {
  id: string;
  shape: [number, number, number];
  top_score: number | null;
  n_regions: number;
  n_done: number;
}

export interface RegionRecord {
  region_id: number;
  voxel_count: number;
  bbox: BBox;
  centroid: [number, number, number];
  score: number;
  mean_uncertainty: number;
  bin_index: number;
  status: RegionStatus;
}

export interface RegionDetail extends RegionRecord {
  recommended_view: { z: number; y: number; x: number };
}

export interface TopologyDiff {
  d_beta0: number;
  d_beta1: number;
  d_beta2: number;
  classification: "split" | "join" | "loop_change" | "cavity_change" | "none" | "mixed";
}

export interface EditResponse {
  seq: number;
  local_topology_diff: TopologyDiff;
}

export interface DoneResponse {
  seq: number;
  next_region: number | null;
}

export interface SessionState {
  seq: number;
  n_done: number;
  n_regions: number;
  current_region: number | null;
}

export interface TopologyReport {
  beta0: number;
  beta1: number;
  beta2: number;
  euler: number;
  component_sizes: number[];
}

export interface ApiErrorBody {
  code: string;
  message: string;
}

/** In-memory fake of the uqcure service for flow tests.
 *
 * Mirrors the wire contract (shapes, codes, optimistic seq) without any
 * volume math: edits covering the scripted bridge voxels answer "split",
 * everything else "none".
 */

import type { FetchLike } from "./api.js";
import type { DatasetSummary, RegionRecord, Voxel } from "./types.js";

export interface FakeServerOptions {
  datasetId?: string;
  shape?: [number, number, number];
  bridgeVoxels?: Voxel[];
}

export class FakeServer {
  readonly datasetId: string;
  readonly shape: [number, number, number];
  readonly bridgeVoxels: Voxel[];
  seq = 0;
  undone = 0;
  beta0 = 1;
  regions: RegionRecord[];
  readonly log: string[] = [];
  failNextRequests = 0;

  constructor(opts: FakeServerOptions = {}) {
    this.datasetId = opts.datasetId ?? "demo";
    this.shape = opts.shape ?? [20, 20, 20];
    this.bridgeVoxels = opts.bridgeVoxels ?? [
      [7, 5, 9],
      [8, 5, 9],
      [9, 5, 9],
    ];
    this.regions = [
      {
        region_id: 1,
        voxel_count: 120,
        bbox: [
          [6, 3, 7],
          [13, 7, 11],
        ],
        centroid: [9.5, 5.0, 9.0],
        score: 0.8,
        mean_uncertainty: 0.78,
        bin_index: 3,
        status: "pending",
      },
      {
        region_id: 2,
        voxel_count: 40,
        bbox: [
          [1, 14, 14],
          [3, 17, 17],
        ],
        centroid: [2.0, 15.5, 15.5],
        score: 0.55,
        mean_uncertainty: 0.52,
        bin_index: 0,
        status: "pending",
      },
    ];
  }

  private json(status: number, body: unknown): Response {
    return new Response(JSON.stringify(body), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  }

  private error(status: number, code: string, message: string): Response {
    return this.json(status, { code, message });
  }

  get nDone(): number {
    return this.regions.filter((r) => r.status === "done").length;
  }

  get fetch(): FetchLike {
    return async (input: string, init?: RequestInit) => this.handle(input, init);
  }

  private async handle(url: string, init?: RequestInit): Promise<Response> {
    const method = init?.method ?? "GET";
    const u = new URL(url, "http://fake");
    const path = u.pathname;
    this.log.push(`${method} ${path}`);
    if (this.failNextRequests > 0) {
      this.failNextRequests -= 1;
      throw new TypeError("network down");
    }

    if (method === "GET" && path === "/datasets") {
      const summary: DatasetSummary = {
        id: this.datasetId,
        shape: this.shape,
        top_score: this.regions[0]?.score ?? null,
        n_regions: this.regions.length,
        n_done: this.nDone,
      };
      return this.json(200, [summary]);
    }
    const prefix = `/datasets/${this.datasetId}`;
    if (!path.startsWith(prefix)) return this.error(404, "unknown_dataset", "no such dataset");
    const rest = path.slice(prefix.length);

    if (method === "GET" && rest === "/regions") return this.json(200, this.regions);
    const regionMatch = rest.match(/^\/regions\/(\d+)(\/(inspect|done))?$/);
    if (regionMatch) {
      const region = this.regions.find((r) => r.region_id === Number(regionMatch[1]));
      if (!region) return this.error(404, "unknown_region", "no such region");
      if (method === "GET") {
        return this.json(200, {
          ...region,
          recommended_view: {
            z: Math.round(region.centroid[0]),
            y: Math.round(region.centroid[1]),
            x: Math.round(region.centroid[2]),
          },
        });
      }
      if (regionMatch[3] === "inspect") {
        if (region.status === "pending") region.status = "inspected";
        return this.json(200, { region_id: region.region_id, status: region.status });
      }
      if (regionMatch[3] === "done") {
        if (region.status === "done") return this.error(409, "already_done", "already done");
        region.status = "done";
        this.seq += 1;
        const next = this.regions.find((r) => r.status !== "done");
        return this.json(200, { seq: this.seq, next_region: next ? next.region_id : null });
      }
    }
    if (method === "GET" && rest === "/state") {
      return this.json(200, {
        seq: this.seq,
        n_done: this.nDone,
        n_regions: this.regions.length,
        current_region: this.regions.find((r) => r.status !== "done")?.region_id ?? null,
      });
    }
    if (method === "GET" && rest === "/topology") {
      return this.json(200, { beta0: this.beta0, beta1: 0, beta2: 0, euler: this.beta0, component_sizes: [] });
    }
    if (method === "POST" && rest === "/edits") {
      const body = JSON.parse(String(init?.body ?? "{}")) as {
        kind: string;
        voxels: Voxel[];
        region_id: number | null;
        expected_seq?: number;
      };
      if (body.expected_seq !== undefined && body.expected_seq !== this.seq) {
        return this.error(409, "stale_seq", `expected ${body.expected_seq} != ${this.seq}`);
      }
      if (!Array.isArray(body.voxels) || body.voxels.length === 0) {
        return this.error(400, "bad_edit", "voxels required");
      }
      this.seq += 1;
      const covered = this.bridgeVoxels.every((b) =>
        body.voxels.some((v) => v[0] === b[0] && v[1] === b[1] && v[2] === b[2]),
      );
      const split = body.kind === "erase" && covered;
      if (split) this.beta0 += 1;
      if (body.region_id !== null) {
        const region = this.regions.find((r) => r.region_id === body.region_id);
        if (region && region.status !== "done") region.status = "edited";
      }
      return this.json(200, {
        seq: this.seq,
        local_topology_diff: {
          d_beta0: split ? 1 : 0,
          d_beta1: 0,
          d_beta2: 0,
          classification: split ? "split" : "none",
        },
      });
    }
    if (method === "POST" && rest === "/undo") {
      if (this.seq - this.undone <= 0) return this.error(409, "nothing_to_undo", "nothing to undo");
      this.undone += 1;
      this.seq += 1;
      return this.json(200, { seq: this.seq });
    }
    return this.error(404, "not_found", `no route ${method} ${path}`);
  }
}

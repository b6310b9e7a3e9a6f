import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "./api.js";
import { FakeServer } from "./testutil.js";

describe("ApiClient", () => {
  it("builds slice URLs with window and cache-rolling seq", () => {
    const api = new ApiClient("http://host:8077");
    const url = api.sliceUrl("demo", "z", 42, "raw", 7, [0.2, 0.6]);
    const u = new URL(url);
    expect(u.pathname).toBe("/datasets/demo/slice");
    expect(u.searchParams.get("axis")).toBe("z");
    expect(u.searchParams.get("index")).toBe("42");
    expect(u.searchParams.get("layer")).toBe("raw");
    expect(u.searchParams.get("seq")).toBe("7");
    expect(u.searchParams.get("window")).toBe("0.2,0.6");
  });

  it("omits window when unset and escapes dataset ids", () => {
    const api = new ApiClient();
    const url = api.sliceUrl("a b", "y", 0, "seg", 0);
    expect(url).toContain("/datasets/a%20b/slice");
    expect(url).not.toContain("window");
  });

  it("decodes typed responses", async () => {
    const server = new FakeServer();
    const api = new ApiClient("", server.fetch);
    const datasets = await api.listDatasets();
    expect(datasets[0].id).toBe("demo");
    const regions = await api.listRegions("demo");
    expect(regions.map((r) => r.region_id)).toEqual([1, 2]);
    const detail = await api.getRegion("demo", 1);
    expect(detail.recommended_view).toEqual({ z: 10, y: 5, x: 9 });
  });

  it("maps error bodies to ApiError with code and status", async () => {
    const server = new FakeServer();
    const api = new ApiClient("", server.fetch);
    try {
      await api.getRegion("demo", 99);
      expect.unreachable("should have thrown");
    } catch (err) {
      expect(err).toBeInstanceOf(ApiError);
      const apiErr = err as ApiError;
      expect(apiErr.status).toBe(404);
      expect(apiErr.code).toBe("unknown_region");
    }
  });

  it("falls back to status text for non-JSON errors", async () => {
    const api = new ApiClient("", async () => new Response("boom", { status: 502, statusText: "Bad Gateway" }));
    await expect(api.listDatasets()).rejects.toMatchObject({ code: "http_error", status: 502 });
  });
});

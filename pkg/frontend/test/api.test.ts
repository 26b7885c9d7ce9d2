import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";

function capture(responses: Record<string, unknown> = {}) {
  const calls: Array<{ url: string; init?: RequestInit }> = [];
  const fetchImpl = async (url: string, init?: RequestInit) => {
    calls.push({ url, init });
    const body = responses[url.split("?")[0]] ?? {};
    return new Response(JSON.stringify(body), { status: 200 });
  };
  return { calls, fetchImpl };
}

describe("ApiClient", () => {
  it("builds the export url shared with the CLI byte-for-byte", () => {
    const api = new ApiClient("");
    expect(api.exportUrl(0.95, "csv")).toBe("/api/clusters/export?tau=0.95&format=csv");
    expect(api.exportUrl(0.5, "json")).toBe("/api/clusters/export?tau=0.5&format=json");
  });

  it("sends bearer token on mutations only", async () => {
    const { calls, fetchImpl } = capture();
    const api = new ApiClient("", "s3cret", fetchImpl);
    await api.getGraph();
    await api.postEdit("a", "b", "forced_cut");
    const getHeaders = calls[0].init?.headers as Record<string, string>;
    const postHeaders = calls[1].init?.headers as Record<string, string>;
    expect(getHeaders.Authorization).toBeUndefined();
    expect(postHeaders.Authorization).toBe("Bearer s3cret");
    expect(JSON.parse(String(calls[1].init?.body))).toEqual({
      a: "a",
      b: "b",
      edit: "forced_cut",
      author: "expert",
    });
  });

  it("encodes ids in paths", async () => {
    const { calls, fetchImpl } = capture();
    const api = new ApiClient("", null, fetchImpl);
    await api.deleteEdit("a/x", "b c");
    expect(calls[0].url).toBe("/api/edits/a%2Fx/b%20c");
  });

  it("raises ApiError with the service detail", async () => {
    const api = new ApiClient("", null, async () =>
      new Response(JSON.stringify({ detail: "unknown node" }), { status: 404 }),
    );
    await expect(api.getGraph()).rejects.toThrowError(ApiError);
    await expect(api.getGraph()).rejects.toThrowError("unknown node");
  });
});

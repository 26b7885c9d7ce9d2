import { describe, expect, it } from "vitest";

import type { GraphDoc } from "../src/api.js";
import { neighborsOf, searchNodes } from "../src/search.js";
import { EDGE_DISPLAY_FLOOR, clusterColor, edgeWidth, rateLimited } from "../src/util.js";

const graph: GraphDoc = {
  version: 0,
  nodes: ["L0020R", "L0021R", "L0120R", "L0001D"],
  edges: [
    { a: "L0020R", b: "L0021R", p: 0.97 },
    { a: "L0020R", b: "L0120R", p: 0.2 },
    { a: "L0001D", b: "L0020R", p: 0.5 },
  ],
  overlay: [],
};

describe("searchNodes", () => {
  it("finds a unique match and focuses it", () => {
    expect(searchNodes(graph, "L0021")).toEqual({ kind: "unique", matches: ["L0021R"] });
  });

  it("exact id wins even when it prefixes others", () => {
    expect(searchNodes(graph, "L0020R").kind).toBe("unique");
  });

  it("ambiguous prefixes return a disambiguation list", () => {
    const result = searchNodes(graph, "L00");
    expect(result.kind).toBe("ambiguous");
    expect(result.matches).toEqual(["L0001D", "L0020R", "L0021R"]);
  });

  it("empty query is a no-op", () => {
    expect(searchNodes(graph, "  ")).toEqual({ kind: "none", matches: [] });
  });

  it("no match reports none", () => {
    expect(searchNodes(graph, "X9").kind).toBe("none");
  });
});

describe("neighborsOf", () => {
  it("sorts neighbors by probability descending", () => {
    expect(neighborsOf(graph, "L0020R").map((n) => n.id)).toEqual([
      "L0021R",
      "L0001D",
      "L0120R",
    ]);
  });
});

describe("rateLimited", () => {
  it("caps execution frequency at the configured spacing", () => {
    let clock = 0;
    const scheduled: Array<{ at: number; cb: () => void }> = [];
    const calls: number[] = [];
    const fn = rateLimited(
      (v: number) => calls.push(v),
      200,
      () => clock,
      (cb, ms) => scheduled.push({ at: clock + ms, cb }),
    );
    for (let i = 0; i < 10; i++) {
      fn(i);
      clock += 20; // a slider drag: events every 20 ms
    }
    // leading call fired immediately, the rest collapsed into one trailing call
    expect(calls).toEqual([0]);
    expect(scheduled).toHaveLength(1);
    clock = scheduled[0].at;
    scheduled[0].cb();
    expect(calls).toEqual([0, 9]); // latest value wins
  });

  it("allows spaced calls straight through", () => {
    let clock = 0;
    const calls: number[] = [];
    const fn = rateLimited((v: number) => calls.push(v), 200, () => clock, () => {});
    fn(1);
    clock += 250;
    fn(2);
    expect(calls).toEqual([1, 2]);
  });
});

describe("render helpers", () => {
  it("edge width grows with probability", () => {
    expect(edgeWidth(0.1)).toBeLessThan(edgeWidth(0.9));
  });

  it("display floor hides weak edges by default", () => {
    expect(EDGE_DISPLAY_FLOOR).toBe(0.1);
  });

  it("singleton clusters render muted", () => {
    expect(clusterColor(3, 1)).toBe("#d8d8d8");
    expect(clusterColor(3, 4)).not.toBe("#d8d8d8");
  });
});

import { describe, expect, it } from "vitest";

import type { GraphDoc } from "../src/api.js";
import { computeLayout } from "../src/layout.js";

function doc(version: number): GraphDoc {
  return {
    version,
    nodes: ["a", "b", "c", "d", "e"],
    edges: [
      { a: "a", b: "b", p: 0.95 },
      { a: "b", b: "c", p: 0.9 },
      { a: "d", b: "e", p: 0.8 },
    ],
    overlay: [],
  };
}

describe("computeLayout", () => {
  it("is deterministic for a fixed graph version", () => {
    const first = computeLayout(doc(3));
    const second = computeLayout(doc(3));
    for (const node of first.keys()) {
      expect(second.get(node)).toEqual(first.get(node));
    }
  });

  it("changes with the graph version (reseeded)", () => {
    const v0 = computeLayout(doc(0));
    const v1 = computeLayout(doc(1));
    const moved = [...v0.keys()].some((n) => {
      const p0 = v0.get(n)!;
      const p1 = v1.get(n)!;
      return Math.abs(p0.x - p1.x) > 1e-9 || Math.abs(p0.y - p1.y) > 1e-9;
    });
    expect(moved).toBe(true);
  });

  it("pulls linked nodes closer than unlinked ones", () => {
    const layout = computeLayout(doc(0), { iterations: 300 });
    const dist = (p: string, q: string) => {
      const a = layout.get(p)!;
      const b = layout.get(q)!;
      return Math.hypot(a.x - b.x, a.y - b.y);
    };
    expect(dist("a", "b")).toBeLessThan(dist("a", "d"));
    expect(dist("d", "e")).toBeLessThan(dist("c", "e"));
  });

  it("lays out every node with finite coordinates", () => {
    const layout = computeLayout(doc(0));
    expect(layout.size).toBe(5);
    for (const { x, y } of layout.values()) {
      expect(Number.isFinite(x) && Number.isFinite(y)).toBe(true);
    }
  });
});

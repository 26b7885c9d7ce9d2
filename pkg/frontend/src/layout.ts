/** Deterministic force-directed layout.
 *
 * Seeded from the graph version so a given graph state always renders the
 * same picture (reproducible screenshots). Plain spring-electric model run
 * for a fixed number of iterations; no wall-clock or Math.random input.
 */

import type { GraphDoc } from "./api.js";

export interface LayoutPoint {
  x: number;
  y: number;
}

export type Layout = Map<string, LayoutPoint>;

/** Mulberry32: tiny deterministic PRNG, enough for layout jitter. */
export function mulberry32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export interface LayoutOptions {
  iterations?: number;
  repulsion?: number;
  springLength?: number;
  springStrength?: number;
  gravity?: number;
}

export function computeLayout(graph: GraphDoc, options: LayoutOptions = {}): Layout {
  const {
    iterations = 150,
    repulsion = 0.4,
    springLength = 0.35,
    springStrength = 0.15,
    gravity = 0.02,
  } = options;

  const rng = mulberry32(0x5eed ^ graph.version);
  const nodes = [...graph.nodes].sort();
  const index = new Map(nodes.map((n, i) => [n, i]));
  const n = nodes.length;
  const x = new Float64Array(n);
  const y = new Float64Array(n);
  for (let i = 0; i < n; i++) {
    const angle = 2 * Math.PI * rng();
    const radius = 0.3 + 0.7 * rng();
    x[i] = radius * Math.cos(angle);
    y[i] = radius * Math.sin(angle);
  }

  const springs: Array<[number, number, number]> = [];
  for (const edge of graph.edges) {
    const i = index.get(edge.a);
    const j = index.get(edge.b);
    if (i === undefined || j === undefined) continue;
    springs.push([i, j, edge.p]);
  }

  const fx = new Float64Array(n);
  const fy = new Float64Array(n);
  for (let step = 0; step < iterations; step++) {
    fx.fill(0);
    fy.fill(0);
    const temperature = 0.12 * (1 - step / iterations) + 0.01;
    for (let i = 0; i < n; i++) {
      for (let j = i + 1; j < n; j++) {
        let dx = x[i] - x[j];
        let dy = y[i] - y[j];
        let d2 = dx * dx + dy * dy;
        if (d2 < 1e-9) {
          // deterministic tie-break keeps coincident nodes separable
          dx = 1e-4 * (1 + ((i * 31 + j) % 7));
          dy = 1e-4;
          d2 = dx * dx + dy * dy;
        }
        const force = repulsion / (d2 * Math.sqrt(d2)) / Math.max(4, n);
        fx[i] += dx * force;
        fy[i] += dy * force;
        fx[j] -= dx * force;
        fy[j] -= dy * force;
      }
    }
    for (const [i, j, p] of springs) {
      const dx = x[j] - x[i];
      const dy = y[j] - y[i];
      const d = Math.sqrt(dx * dx + dy * dy) || 1e-6;
      // stronger pull for confident links
      const force = springStrength * (0.2 + p) * (d - springLength * (1.5 - p)) / d;
      fx[i] += dx * force;
      fy[i] += dy * force;
      fx[j] -= dx * force;
      fy[j] -= dy * force;
    }
    for (let i = 0; i < n; i++) {
      fx[i] -= gravity * x[i];
      fy[i] -= gravity * y[i];
      const magnitude = Math.sqrt(fx[i] * fx[i] + fy[i] * fy[i]);
      const cap = magnitude > temperature ? temperature / magnitude : 1;
      x[i] += fx[i] * cap;
      y[i] += fy[i] * cap;
    }
  }

  const layout: Layout = new Map();
  for (let i = 0; i < n; i++) layout.set(nodes[i], { x: x[i], y: y[i] });
  return layout;
}

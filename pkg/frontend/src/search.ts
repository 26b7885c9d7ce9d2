/** Scan-id prefix search and the neighbor panel ordering. */

import type { GraphDoc } from "./api.js";

export interface SearchResult {
  kind: "none" | "unique" | "ambiguous";
  matches: string[];
}

export function searchNodes(graph: GraphDoc, query: string, limit = 12): SearchResult {
  const trimmed = query.trim();
  if (trimmed === "") return { kind: "none", matches: [] };
  const needle = trimmed.toUpperCase();
  const matches = graph.nodes
    .filter((n) => n.toUpperCase().startsWith(needle))
    .sort()
    .slice(0, limit);
  if (matches.length === 0) return { kind: "none", matches: [] };
  if (matches.length === 1 || matches[0].toUpperCase() === needle) {
    return { kind: "unique", matches: [matches[0]] };
  }
  return { kind: "ambiguous", matches };
}

export interface Neighbor {
  id: string;
  p: number;
}

/** Connections of one node, strongest first (ties by id for stability). */
export function neighborsOf(graph: GraphDoc, node: string): Neighbor[] {
  const out: Neighbor[] = [];
  for (const edge of graph.edges) {
    if (edge.a === node) out.push({ id: edge.b, p: edge.p });
    else if (edge.b === node) out.push({ id: edge.a, p: edge.p });
  }
  out.sort((x, y) => y.p - x.p || (x.id < y.id ? -1 : 1));
  return out;
}

/** Canvas renderer for the similarity graph. */

import type { ClusterDoc, GraphDoc } from "./api.js";
import type { Layout } from "./layout.js";
import { EDGE_DISPLAY_FLOOR, clusterColor, edgeWidth } from "./util.js";

export interface ViewTransform {
  scale: number;
  offsetX: number;
  offsetY: number;
}

export interface RenderState {
  graph: GraphDoc;
  clusters: ClusterDoc | null;
  layout: Layout;
  selection: Set<string>;
  focused: string | null;
  showWeakEdges: boolean;
}

export function fitView(layout: Layout, width: number, height: number): ViewTransform {
  let minX = Infinity, maxX = -Infinity, minY = Infinity, maxY = -Infinity;
  for (const { x, y } of layout.values()) {
    minX = Math.min(minX, x);
    maxX = Math.max(maxX, x);
    minY = Math.min(minY, y);
    maxY = Math.max(maxY, y);
  }
  if (!isFinite(minX)) return { scale: 1, offsetX: width / 2, offsetY: height / 2 };
  const margin = 40;
  const spanX = Math.max(maxX - minX, 1e-6);
  const spanY = Math.max(maxY - minY, 1e-6);
  const scale = Math.min((width - 2 * margin) / spanX, (height - 2 * margin) / spanY);
  return {
    scale,
    offsetX: width / 2 - scale * (minX + maxX) / 2,
    offsetY: height / 2 - scale * (minY + maxY) / 2,
  };
}

export function toScreen(view: ViewTransform, x: number, y: number): [number, number] {
  return [view.scale * x + view.offsetX, view.scale * y + view.offsetY];
}

export function nodeAt(
  layout: Layout,
  view: ViewTransform,
  px: number,
  py: number,
  radius = 10,
): string | null {
  let best: string | null = null;
  let bestD = radius * radius;
  for (const [id, { x, y }] of layout) {
    const [sx, sy] = toScreen(view, x, y);
    const d = (sx - px) * (sx - px) + (sy - py) * (sy - py);
    if (d <= bestD) {
      bestD = d;
      best = id;
    }
  }
  return best;
}

export function clusterSizes(clusters: ClusterDoc | null): Map<number, number> {
  const sizes = new Map<number, number>();
  if (clusters) {
    for (const c of clusters.clusters) sizes.set(c.id, c.members.length);
  }
  return sizes;
}

export function renderGraph(
  ctx: CanvasRenderingContext2D,
  state: RenderState,
  view: ViewTransform,
  width: number,
  height: number,
): void {
  ctx.clearRect(0, 0, width, height);
  const sizes = clusterSizes(state.clusters);
  const overlayByKey = new Map(
    state.graph.overlay.map((o) => [`${o.a}|${o.b}`, o.edit] as const),
  );

  for (const edge of state.graph.edges) {
    const kind = overlayByKey.get(`${edge.a}|${edge.b}`);
    if (!state.showWeakEdges && edge.p < EDGE_DISPLAY_FLOOR && kind === undefined) continue;
    const pa = state.layout.get(edge.a);
    const pb = state.layout.get(edge.b);
    if (!pa || !pb) continue;
    const [ax, ay] = toScreen(view, pa.x, pa.y);
    const [bx, by] = toScreen(view, pb.x, pb.y);
    ctx.beginPath();
    ctx.moveTo(ax, ay);
    ctx.lineTo(bx, by);
    if (kind === "forced_cut") {
      ctx.strokeStyle = "#c04040";
      ctx.setLineDash([4, 4]);
      ctx.lineWidth = 1.5;
    } else if (kind === "forced_link") {
      ctx.strokeStyle = "#2a7a2a";
      ctx.setLineDash([]);
      ctx.lineWidth = 2.5;
    } else {
      ctx.strokeStyle = `rgba(70, 90, 110, ${0.15 + 0.55 * edge.p})`;
      ctx.setLineDash([]);
      ctx.lineWidth = edgeWidth(edge.p);
    }
    ctx.stroke();
    ctx.setLineDash([]);
  }

  // overlay-only forced links (pairs with no scored edge)
  for (const o of state.graph.overlay) {
    if (o.edit !== "forced_link") continue;
    if (state.graph.edges.some((e) => e.a === o.a && e.b === o.b)) continue;
    const pa = state.layout.get(o.a);
    const pb = state.layout.get(o.b);
    if (!pa || !pb) continue;
    const [ax, ay] = toScreen(view, pa.x, pa.y);
    const [bx, by] = toScreen(view, pb.x, pb.y);
    ctx.beginPath();
    ctx.moveTo(ax, ay);
    ctx.lineTo(bx, by);
    ctx.strokeStyle = "#2a7a2a";
    ctx.lineWidth = 2.5;
    ctx.stroke();
  }

  for (const [id, { x, y }] of state.layout) {
    const [sx, sy] = toScreen(view, x, y);
    const cid = state.clusters?.assignment[id];
    const size = cid === undefined ? 0 : sizes.get(cid) ?? 0;
    ctx.beginPath();
    ctx.arc(sx, sy, state.focused === id ? 9 : 6, 0, 2 * Math.PI);
    ctx.fillStyle = cid === undefined ? "#d8d8d8" : clusterColor(cid, size);
    ctx.fill();
    if (state.selection.has(id) || state.focused === id) {
      ctx.strokeStyle = "#202020";
      ctx.lineWidth = 2;
      ctx.stroke();
    }
    if (state.focused === id || state.selection.has(id)) {
      ctx.fillStyle = "#202020";
      ctx.font = "11px sans-serif";
      ctx.fillText(id, sx + 10, sy + 4);
    }
  }
}

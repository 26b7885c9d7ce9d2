/** Application wiring: canvas graph, threshold slider, edits, inspection. */

import { ApiClient } from "./api.js";
import { computeLayout, Layout } from "./layout.js";
import { fitView, nodeAt, renderGraph, RenderState } from "./render.js";
import { neighborsOf, searchNodes } from "./search.js";
import { GraphStore } from "./state.js";
import { rateLimited } from "./util.js";
import { PairViewer, renderHistogram } from "./viewer3d.js";

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing element #${id}`);
  return found as T;
}

export function startApp(): void {
  const api = new ApiClient("", localStorage.getItem("diematch_token"));
  const store = new GraphStore(api);

  const canvas = el<HTMLCanvasElement>("graph");
  const ctx = canvas.getContext("2d")!;
  const slider = el<HTMLInputElement>("tau");
  const tauLabel = el<HTMLSpanElement>("tau-value");
  const searchBox = el<HTMLInputElement>("search");
  const searchResults = el<HTMLDivElement>("search-results");
  const neighborPanel = el<HTMLDivElement>("neighbors");
  const statusBar = el<HTMLDivElement>("status");
  const staleBanner = el<HTMLDivElement>("stale-banner");
  const pendingPanel = el<HTMLDivElement>("pending");
  const inspect = el<HTMLDivElement>("inspect");
  const inspectCanvas = el<HTMLCanvasElement>("inspect-view");
  const inspectCtx = inspectCanvas.getContext("2d")!;
  const histogramCanvas = el<HTMLCanvasElement>("inspect-histogram");
  const inspectInfo = el<HTMLDivElement>("inspect-info");
  const weakToggle = el<HTMLInputElement>("show-weak");

  let layout: Layout = new Map();
  let layoutVersion = -1;
  const selection = new Set<string>();
  let focused: string | null = null;
  const viewer = new PairViewer({ source: [], target: [] });

  function redraw(): void {
    if (!store.graph) return;
    if (store.graph.version !== layoutVersion) {
      layout = computeLayout(store.graph);
      layoutVersion = store.graph.version;
    }
    const width = (canvas.width = canvas.clientWidth);
    const height = (canvas.height = canvas.clientHeight);
    const view = fitView(layout, width, height);
    const state: RenderState = {
      graph: store.graph,
      clusters: store.clusters,
      layout,
      selection,
      focused,
      showWeakEdges: weakToggle.checked,
    };
    renderGraph(ctx, state, view, width, height);
  }

  function renderPending(): void {
    pendingPanel.replaceChildren();
    for (const entry of store.pending) {
      const row = document.createElement("div");
      row.className = `pending ${entry.state}`;
      row.textContent = `${entry.edit} ${entry.a}-${entry.b} [${entry.state}]`;
      if (entry.state !== "sending") {
        const retry = document.createElement("button");
        retry.textContent = "retry";
        retry.onclick = () => void store.retry(entry);
        const drop = document.createElement("button");
        drop.textContent = "discard";
        drop.onclick = () => store.discard(entry);
        row.append(" ", retry, " ", drop);
      }
      pendingPanel.append(row);
    }
  }

  store.subscribe((event) => {
    if (event.kind === "graph" || event.kind === "clusters") {
      staleBanner.hidden = !store.stale;
      store.stale = false;
      redraw();
    } else if (event.kind === "stale") {
      staleBanner.hidden = false;
    } else if (event.kind === "pending") {
      renderPending();
    } else if (event.kind === "error" && event.message) {
      statusBar.textContent = event.message;
    }
  });

  // slider refetches are spaced >= 200 ms apart (max five per second)
  const pushTau = rateLimited((value: number) => {
    void store.setTau(value);
  }, 200);
  slider.oninput = () => {
    tauLabel.textContent = slider.value;
    pushTau(Number(slider.value));
  };

  weakToggle.onchange = redraw;

  canvas.onclick = (event) => {
    if (!store.graph) return;
    const rect = canvas.getBoundingClientRect();
    const view = fitView(layout, canvas.width, canvas.height);
    const hit = nodeAt(layout, view, event.clientX - rect.left, event.clientY - rect.top);
    if (!hit) {
      selection.clear();
      redraw();
      return;
    }
    if (selection.has(hit)) selection.delete(hit);
    else {
      if (selection.size >= 2) selection.clear();
      selection.add(hit);
    }
    focused = hit;
    showNeighbors(hit);
    updateActionButtons();
    redraw();
  };

  function selectedPair(): [string, string] | null {
    if (selection.size !== 2) return null;
    const [a, b] = [...selection].sort();
    return [a, b];
  }

  function updateActionButtons(): void {
    const pair = selectedPair();
    (el<HTMLButtonElement>("btn-link")).disabled = pair === null;
    (el<HTMLButtonElement>("btn-cut")).disabled = pair === null;
    (el<HTMLButtonElement>("btn-clear")).disabled = pair === null;
    (el<HTMLButtonElement>("btn-inspect")).disabled = pair === null;
  }

  el<HTMLButtonElement>("btn-link").onclick = () => {
    const pair = selectedPair();
    if (pair) void store.submitEdit(pair[0], pair[1], "forced_link");
  };
  el<HTMLButtonElement>("btn-cut").onclick = () => {
    const pair = selectedPair();
    if (pair) void store.submitEdit(pair[0], pair[1], "forced_cut");
  };
  el<HTMLButtonElement>("btn-clear").onclick = () => {
    const pair = selectedPair();
    if (pair) void store.submitEdit(pair[0], pair[1], "clear");
  };

  el<HTMLButtonElement>("btn-inspect").onclick = async () => {
    const pair = selectedPair();
    if (!pair) return;
    inspect.hidden = false;
    inspectInfo.textContent = "running registration preview…";
    try {
      const detail = await api.getPairDetail(pair[0], pair[1]).catch(() => null);
      const preview = await api.postPreview(pair[0], pair[1]);
      viewer.setPair({ source: preview.source_points, target: preview.target_points });
      viewer.render(inspectCtx, inspectCanvas.width, inspectCanvas.height);
      if (detail) {
        renderHistogram(
          histogramCanvas.getContext("2d")!,
          detail.histogram,
          histogramCanvas.width,
          histogramCanvas.height,
        );
        inspectInfo.textContent =
          `p = ${detail.probability.toFixed(4)}  rmse = ${preview.rmse.toFixed(3)} mm` +
          (preview.converged ? "" : "  (no convergence)");
      } else {
        inspectInfo.textContent = `rmse = ${preview.rmse.toFixed(3)} mm (pair not scored)`;
      }
    } catch (error) {
      inspectInfo.textContent =
        error instanceof Error && error.message.includes("already running")
          ? "a preview job is already running, try again shortly"
          : `preview failed: ${error}`;
    }
  };

  let dragging = false;
  let lastX = 0;
  let lastY = 0;
  inspectCanvas.onmousedown = (e) => {
    dragging = true;
    lastX = e.clientX;
    lastY = e.clientY;
  };
  window.addEventListener("mouseup", () => (dragging = false));
  inspectCanvas.onmousemove = (e) => {
    if (!dragging) return;
    viewer.rotateBy((e.clientX - lastX) * 0.01, (e.clientY - lastY) * 0.01);
    lastX = e.clientX;
    lastY = e.clientY;
    viewer.render(inspectCtx, inspectCanvas.width, inspectCanvas.height);
  };
  el<HTMLButtonElement>("btn-close-inspect").onclick = () => (inspect.hidden = true);

  searchBox.oninput = () => {
    if (!store.graph) return;
    const result = searchNodes(store.graph, searchBox.value);
    searchResults.replaceChildren();
    if (result.kind === "none") {
      searchResults.textContent = searchBox.value.trim() ? "no match" : "";
      return;
    }
    for (const id of result.matches) {
      const item = document.createElement("div");
      item.className = "hit";
      item.textContent = id;
      item.onclick = () => {
        focused = id;
        showNeighbors(id);
        redraw();
      };
      searchResults.append(item);
    }
    if (result.kind === "unique") {
      focused = result.matches[0];
      showNeighbors(focused);
      redraw();
    }
  };

  function showNeighbors(node: string): void {
    if (!store.graph) return;
    neighborPanel.replaceChildren();
    const heading = document.createElement("div");
    heading.className = "heading";
    heading.textContent = `${node} connections`;
    neighborPanel.append(heading);
    for (const { id, p } of neighborsOf(store.graph, node)) {
      const row = document.createElement("div");
      row.textContent = `${id}  p=${p.toFixed(3)}`;
      row.onclick = () => {
        focused = id;
        redraw();
      };
      neighborPanel.append(row);
    }
  }

  el<HTMLButtonElement>("btn-export-csv").onclick = () => {
    window.location.href = api.exportUrl(store.tau, "csv");
  };
  el<HTMLButtonElement>("btn-export-json").onclick = () => {
    window.location.href = api.exportUrl(store.tau, "json");
  };
  el<HTMLButtonElement>("btn-reload").onclick = () => void store.load();

  window.addEventListener("resize", redraw);
  updateActionButtons();
  void store.load().catch((error) => {
    statusBar.textContent = `failed to load graph: ${error}`;
  });
}

if (typeof document !== "undefined" && document.getElementById("graph")) {
  startApp();
}

/** Typed client for the graph service; the UI never computes clusters itself. */

export interface GraphEdge {
  a: string;
  b: string;
  p: number;
}

export interface OverlayEntry {
  a: string;
  b: string;
  edit: "forced_link" | "forced_cut";
  author: string;
  ts: string;
}

export interface GraphDoc {
  version: number;
  nodes: string[];
  edges: GraphEdge[];
  overlay: OverlayEntry[];
}

export interface ClusterDoc {
  tau: number;
  version: number;
  assignment: Record<string, number>;
  clusters: { id: number; members: string[] }[];
}

export interface PairDetail {
  a: string;
  b: string;
  probability: number;
  rmse: number;
  histogram: number[];
}

export interface PreviewDoc {
  pair: string[];
  rmse: number;
  converged: boolean;
  transform: { rotation: number[][]; translation: number[] };
  source_points: number[][];
  target_points: number[][];
}

export type EditKind = "forced_link" | "forced_cut" | "clear";

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private token: string | null = null,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  setToken(token: string | null): void {
    this.token = token;
  }

  exportUrl(tau: number, format: "csv" | "json"): string {
    return `${this.base}/api/clusters/export?tau=${encodeURIComponent(tau)}&format=${format}`;
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const headers: Record<string, string> = {
      ...(init?.headers as Record<string, string> | undefined),
    };
    if (init?.body !== undefined) headers["Content-Type"] = "application/json";
    if (this.token !== null && init?.method && init.method !== "GET") {
      headers["Authorization"] = `Bearer ${this.token}`;
    }
    const response = await this.fetchImpl(`${this.base}${path}`, { ...init, headers });
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = await response.json();
        if (body && typeof body.detail === "string") detail = body.detail;
      } catch {
        /* non-JSON error body */
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  getGraph(): Promise<GraphDoc> {
    return this.request<GraphDoc>("/api/graph");
  }

  getClusters(tau: number): Promise<ClusterDoc> {
    return this.request<ClusterDoc>(`/api/clusters?tau=${encodeURIComponent(tau)}`);
  }

  postEdit(a: string, b: string, edit: EditKind, author = "expert"): Promise<{ version: number }> {
    return this.request<{ version: number }>("/api/edits", {
      method: "POST",
      body: JSON.stringify({ a, b, edit, author }),
    });
  }

  deleteEdit(a: string, b: string): Promise<{ version: number }> {
    return this.request<{ version: number }>(
      `/api/edits/${encodeURIComponent(a)}/${encodeURIComponent(b)}`,
      { method: "DELETE" },
    );
  }

  getPairDetail(a: string, b: string): Promise<PairDetail> {
    return this.request<PairDetail>(
      `/api/pairs/${encodeURIComponent(a)}/${encodeURIComponent(b)}`,
    );
  }

  postPreview(a: string, b: string, voxel = 0.2): Promise<PreviewDoc> {
    return this.request<PreviewDoc>(
      `/api/pairs/${encodeURIComponent(a)}/${encodeURIComponent(b)}/preview?voxel=${voxel}`,
      { method: "POST" },
    );
  }

  getScanPoints(id: string, voxel = 0.2): Promise<{ id: string; points: number[][] }> {
    return this.request<{ id: string; points: number[][] }>(
      `/api/scans/${encodeURIComponent(id)}/points?voxel=${voxel}`,
    );
  }
}

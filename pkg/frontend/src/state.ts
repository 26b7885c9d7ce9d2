/** Client-side store: server snapshots plus an optimistic edit buffer.
 *
 * Cluster assignments always come from the service (single source of
 * truth). An edit is applied optimistically to the pending buffer, sent,
 * and reconciled against the server's version; a version conflict or an
 * offline failure keeps the edit buffered and surfaces a retry affordance.
 */

import { ApiClient, ApiError, ClusterDoc, EditKind, GraphDoc } from "./api.js";

export interface PendingEdit {
  a: string;
  b: string;
  edit: EditKind;
  state: "sending" | "failed" | "conflict";
  message?: string;
}

export interface StoreEvent {
  kind: "graph" | "clusters" | "pending" | "stale" | "error";
  message?: string;
}

type Listener = (event: StoreEvent) => void;

export class GraphStore {
  graph: GraphDoc | null = null;
  clusters: ClusterDoc | null = null;
  tau = 0.95; // validated default threshold
  pending: PendingEdit[] = [];
  stale = false;

  private listeners: Listener[] = [];

  constructor(private readonly api: ApiClient) {}

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private emit(event: StoreEvent): void {
    for (const listener of this.listeners) listener(event);
  }

  async load(): Promise<void> {
    this.graph = await this.api.getGraph();
    this.emit({ kind: "graph" });
    await this.refreshClusters();
  }

  async refreshClusters(): Promise<void> {
    this.clusters = await this.api.getClusters(this.tau);
    if (this.graph && this.clusters.version !== this.graph.version) {
      // someone else edited the graph since our snapshot
      this.stale = true;
      this.emit({ kind: "stale" });
    }
    this.emit({ kind: "clusters" });
  }

  async setTau(tau: number): Promise<void> {
    this.tau = tau;
    await this.refreshClusters();
  }

  clusterOf(node: string): number | null {
    if (!this.clusters) return null;
    const cid = this.clusters.assignment[node];
    return cid === undefined ? null : cid;
  }

  /** Optimistic edit: buffer locally, send, reconcile with the response. */
  async submitEdit(a: string, b: string, edit: EditKind): Promise<boolean> {
    const entry: PendingEdit = { a, b, edit, state: "sending" };
    this.pending.push(entry);
    this.emit({ kind: "pending" });
    try {
      const expected = this.graph ? this.graph.version + 1 : null;
      const { version } =
        edit === "clear" ? await this.api.deleteEdit(a, b) : await this.api.postEdit(a, b, edit);
      if (expected !== null && version !== expected) {
        // concurrent edit landed in between: refetch, then replay prompt
        entry.state = "conflict";
        entry.message = `server is at version ${version}, expected ${expected}`;
        this.stale = true;
        await this.reloadAfterConflict();
        return false;
      }
      this.pending = this.pending.filter((p) => p !== entry);
      await this.load();
      this.emit({ kind: "pending" });
      return true;
    } catch (error) {
      entry.state = error instanceof ApiError && error.status === 409 ? "conflict" : "failed";
      entry.message = error instanceof Error ? error.message : String(error);
      this.emit({ kind: "pending" });
      this.emit({ kind: "error", message: entry.message });
      return false;
    }
  }

  private async reloadAfterConflict(): Promise<void> {
    await this.load();
    this.emit({ kind: "pending" });
  }

  /** Re-send a buffered edit (retry affordance after an offline failure). */
  async retry(entry: PendingEdit): Promise<boolean> {
    this.pending = this.pending.filter((p) => p !== entry);
    return this.submitEdit(entry.a, entry.b, entry.edit);
  }

  discard(entry: PendingEdit): void {
    this.pending = this.pending.filter((p) => p !== entry);
    this.emit({ kind: "pending" });
  }
}

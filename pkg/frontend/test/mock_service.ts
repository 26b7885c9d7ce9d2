/** In-memory stand-in for the graph service, mirroring its wire contract. */

import type { GraphDoc } from "../src/api.js";

interface Edge {
  a: string;
  b: string;
  p: number;
}

export class MockService {
  version = 0;
  overlay = new Map<string, { edit: "forced_link" | "forced_cut"; author: string }>();
  offline = false;
  /** extra bumps simulate competing editors */
  versionSkew = 0;
  requests: string[] = [];

  constructor(
    public nodes: string[],
    public edges: Edge[],
  ) {}

  private key(a: string, b: string): string {
    return a < b ? `${a}|${b}` : `${b}|${a}`;
  }

  graphDoc(): GraphDoc {
    return {
      version: this.version,
      nodes: [...this.nodes].sort(),
      edges: this.edges.map((e) => ({ ...e })),
      overlay: [...this.overlay.entries()].map(([key, value]) => {
        const [a, b] = key.split("|");
        return { a, b, edit: value.edit, author: value.author, ts: "t" };
      }),
    };
  }

  /** union-find clustering identical in behavior to the real service */
  clusters(tau: number) {
    const parent = new Map(this.nodes.map((n) => [n, n]));
    const find = (x: string): string => {
      let root = x;
      while (parent.get(root) !== root) root = parent.get(root)!;
      return root;
    };
    const union = (x: string, y: string) => {
      let [rx, ry] = [find(x), find(y)].sort();
      parent.set(ry, rx);
    };
    for (const e of this.edges) {
      const kind = this.overlay.get(this.key(e.a, e.b))?.edit;
      if (kind === "forced_cut") continue;
      if (e.p >= tau || kind === "forced_link") union(e.a, e.b);
    }
    for (const [key, value] of this.overlay) {
      if (value.edit !== "forced_link") continue;
      const [a, b] = key.split("|");
      if (!this.edges.some((e) => this.key(e.a, e.b) === key)) union(a, b);
    }
    const roots = [...new Set(this.nodes.map(find))].sort();
    const assignment: Record<string, number> = {};
    for (const node of this.nodes) assignment[node] = roots.indexOf(find(node));
    return {
      tau,
      version: this.version,
      assignment,
      clusters: roots.map((root, cid) => ({
        id: cid,
        members: this.nodes.filter((n) => find(n) === root).sort(),
      })),
    };
  }

  fetch = async (url: string, init?: RequestInit): Promise<Response> => {
    this.requests.push(`${init?.method ?? "GET"} ${url}`);
    if (this.offline) throw new TypeError("fetch failed");
    const respond = (status: number, body: unknown) =>
      new Response(JSON.stringify(body), {
        status,
        headers: { "Content-Type": "application/json" },
      });

    const parsed = new URL(url, "http://test");
    if (parsed.pathname === "/api/graph") return respond(200, this.graphDoc());
    if (parsed.pathname === "/api/clusters") {
      return respond(200, this.clusters(Number(parsed.searchParams.get("tau") ?? "0.95")));
    }
    if (parsed.pathname === "/api/edits" && init?.method === "POST") {
      const body = JSON.parse(String(init.body)) as {
        a: string;
        b: string;
        edit: "forced_link" | "forced_cut";
        author: string;
      };
      if (!this.nodes.includes(body.a) || !this.nodes.includes(body.b)) {
        return respond(404, { detail: "unknown node" });
      }
      this.version += 1 + this.versionSkew;
      this.versionSkew = 0;
      this.overlay.set(this.key(body.a, body.b), { edit: body.edit, author: body.author });
      return respond(200, { version: this.version });
    }
    const deleteMatch = parsed.pathname.match(/^\/api\/edits\/([^/]+)\/([^/]+)$/);
    if (deleteMatch && init?.method === "DELETE") {
      this.version += 1;
      this.overlay.delete(this.key(deleteMatch[1], deleteMatch[2]));
      return respond(200, { version: this.version });
    }
    return respond(404, { detail: `no route for ${url}` });
  };
}

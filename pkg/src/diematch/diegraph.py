"""Similarity graph over scans and its threshold clustering.

Nodes are scan ids; an undirected edge carries the probability that the two
scans share a die. Clustering keeps edges at or above a threshold tau and
takes connected components. Expert corrections live in a separate overlay
(forced links and forced cuts) that dominates the probabilities without
overwriting them, so the original scores stay auditable. Graphs are
immutable snapshots: every edit produces a new graph with a bumped version.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from datetime import datetime, timezone

from .errors import DuplicatePair, UnknownNode

FORCED_LINK = "forced_link"
FORCED_CUT = "forced_cut"
CLEAR = "clear"
EDIT_KINDS = (FORCED_LINK, FORCED_CUT)


def pair_key(a: str, b: str) -> tuple[str, str]:
    if a == b:
        raise ValueError(f"self-pair {a!r} is not a graph edge")
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class OverlayEdit:
    kind: str
    author: str
    timestamp: str

    def __post_init__(self):
        if self.kind not in EDIT_KINDS:
            raise ValueError(f"edit kind must be one of {EDIT_KINDS}, got {self.kind!r}")


@dataclass(frozen=True)
class SimilarityGraph:
    nodes: tuple[str, ...]
    edges: dict[tuple[str, str], float]
    overlay: dict[tuple[str, str], OverlayEdit]
    version: int = 0

    def __post_init__(self):
        roster = tuple(sorted(set(self.nodes)))
        object.__setattr__(self, "nodes", roster)
        known = set(roster)
        for key, p in self.edges.items():
            if key != pair_key(*key):
                raise ValueError(f"edge key {key} is not canonical")
            if key[0] not in known or key[1] not in known:
                raise UnknownNode(f"edge {key} references unknown node")
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"edge probability {p} outside [0, 1]")
        for key in self.overlay:
            if key[0] not in known or key[1] not in known:
                raise UnknownNode(f"overlay {key} references unknown node")

    def effective_edges(self, tau: float):
        """(a, b) pairs retained at threshold tau, overlay applied."""
        kept = []
        for key, p in self.edges.items():
            edit = self.overlay.get(key)
            if edit is not None and edit.kind == FORCED_CUT:
                continue
            if p >= tau or (edit is not None and edit.kind == FORCED_LINK):
                kept.append(key)
        for key, edit in self.overlay.items():
            if edit.kind == FORCED_LINK and key not in self.edges:
                kept.append(key)
        return kept


@dataclass(frozen=True)
class Clustering:
    """Dense cluster ids per scan; id order follows the smallest member id."""

    assignment: dict[str, int]
    tau: float | None

    def n_clusters(self) -> int:
        return len(set(self.assignment.values()))

    def members(self) -> dict[int, list[str]]:
        out: dict[int, list[str]] = {}
        for node, cid in self.assignment.items():
            out.setdefault(cid, []).append(node)
        return {cid: sorted(nodes) for cid, nodes in sorted(out.items())}


class _UnionFind:
    """Union-find keyed by node name; the representative is the minimum member."""

    def __init__(self, nodes):
        self.parent = {node: node for node in nodes}
        self.size = {node: 1 for node in nodes}
        self.n_components = len(self.parent)
        self.largest = 1 if self.parent else 0

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        self.n_components -= 1
        self.largest = max(self.largest, self.size[ra])


def build_graph(scores, roster) -> SimilarityGraph:
    """Graph with every roster node and one edge per score.

    `scores` may be PairScore objects or (id_a, id_b, probability) triples.
    Partial score sets are allowed: missing pairs simply have no edge.
    """
    nodes = tuple(sorted(set(roster)))
    known = set(nodes)
    edges: dict[tuple[str, str], float] = {}
    for score in scores:
        if hasattr(score, "pair"):
            a, b = score.pair
            p = score.probability
        else:
            a, b, p = score
        if a not in known or b not in known:
            raise UnknownNode(f"score pair ({a!r}, {b!r}) outside the roster")
        key = pair_key(a, b)
        if key in edges:
            raise DuplicatePair(f"two scores for pair {key}")
        edges[key] = float(p)
    return SimilarityGraph(nodes, edges, {})


def cluster(graph: SimilarityGraph, tau: float) -> Clustering:
    """Connected components after dropping edges below tau (overlay dominates)."""
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"tau must be in [0, 1], got {tau}")
    uf = _UnionFind(graph.nodes)
    for a, b in graph.effective_edges(tau):
        uf.union(a, b)
    groups: dict[str, list[str]] = {}
    for node in graph.nodes:
        groups.setdefault(uf.find(node), []).append(node)
    assignment: dict[str, int] = {}
    for cid, root in enumerate(sorted(groups)):
        for node in groups[root]:
            assignment[node] = cid
    return Clustering(assignment, tau)


def apply_edit(
    graph: SimilarityGraph,
    pair: tuple[str, str],
    edit: str,
    author: str = "expert",
    timestamp: str | None = None,
) -> SimilarityGraph:
    """New snapshot with the overlay changed; probabilities stay untouched."""
    a, b = pair
    known = set(graph.nodes)
    if a not in known or b not in known:
        raise UnknownNode(f"cannot edit pair ({a!r}, {b!r}): node missing")
    key = pair_key(a, b)
    overlay = dict(graph.overlay)
    if edit == CLEAR:
        overlay.pop(key, None)
    elif edit in EDIT_KINDS:
        if timestamp is None:
            timestamp = datetime.now(timezone.utc).isoformat()
        overlay[key] = OverlayEdit(edit, author, timestamp)
    else:
        raise ValueError(f"edit must be one of {EDIT_KINDS + (CLEAR,)}, got {edit!r}")
    return SimilarityGraph(graph.nodes, dict(graph.edges), overlay, graph.version + 1)


def sweep_tau(graph: SimilarityGraph, taus) -> list[tuple[float, int, int]]:
    """(tau, cluster count, largest cluster) per threshold, reusing one pass.

    Thresholds must come sorted ascending; internally the sweep walks them
    descending so each step only adds edges to one growing union-find.
    """
    taus = list(taus)
    if any(b < a for a, b in zip(taus, taus[1:])):
        raise ValueError("taus must be sorted ascending")
    if not taus:
        return []

    forced_links = []
    plain_edges = []
    for key, p in graph.edges.items():
        edit = graph.overlay.get(key)
        if edit is not None and edit.kind == FORCED_CUT:
            continue
        if edit is not None and edit.kind == FORCED_LINK:
            forced_links.append(key)
        else:
            plain_edges.append((p, key))
    for key, edit in graph.overlay.items():
        if edit.kind == FORCED_LINK and key not in graph.edges:
            forced_links.append(key)
    plain_edges.sort(key=lambda item: -item[0])

    uf = _UnionFind(graph.nodes)
    for a, b in forced_links:
        uf.union(a, b)
    results = []
    cursor = 0
    for tau in reversed(taus):
        while cursor < len(plain_edges) and plain_edges[cursor][0] >= tau:
            uf.union(*plain_edges[cursor][1])
            cursor += 1
        results.append((tau, uf.n_components, uf.largest))
    return list(reversed(results))


# --- persistence -------------------------------------------------------------

def export_clusters(clustering: Clustering, format: str = "csv") -> str:
    """Deterministic cluster document: clusters by id, members sorted."""
    members = clustering.members()
    if format == "csv":
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["scan_id", "cluster_id"])
        for cid, nodes in members.items():
            for node in nodes:
                writer.writerow([node, cid])
        return buffer.getvalue()
    if format == "json":
        doc = {
            "tau": clustering.tau,
            "clusters": [{"id": cid, "members": nodes} for cid, nodes in members.items()],
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    raise ValueError(f"format must be 'csv' or 'json', got {format!r}")


def import_clusters(document: str, format: str = "csv") -> Clustering:
    if format == "csv":
        reader = csv.DictReader(io.StringIO(document))
        assignment = {row["scan_id"]: int(row["cluster_id"]) for row in reader}
        return Clustering(assignment, tau=None)
    if format == "json":
        doc = json.loads(document)
        assignment = {
            node: c["id"] for c in doc["clusters"] for node in c["members"]
        }
        return Clustering(assignment, tau=doc.get("tau"))
    raise ValueError(f"format must be 'csv' or 'json', got {format!r}")


def graph_to_json(graph: SimilarityGraph) -> str:
    doc = {
        "version": graph.version,
        "nodes": list(graph.nodes),
        "edges": [
            {"a": a, "b": b, "p": p}
            for (a, b), p in sorted(graph.edges.items())
        ],
        "overlay": [
            {"a": a, "b": b, "edit": e.kind, "author": e.author, "ts": e.timestamp}
            for (a, b), e in sorted(graph.overlay.items())
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def graph_from_json(document: str) -> SimilarityGraph:
    doc = json.loads(document)
    edges = {}
    for e in doc.get("edges", []):
        key = pair_key(e["a"], e["b"])
        if key in edges:
            raise DuplicatePair(f"two edges for pair {key}")
        edges[key] = float(e["p"])
    overlay = {}
    for o in doc.get("overlay", []):
        key = pair_key(o["a"], o["b"])
        if key in overlay:
            raise DuplicatePair(f"two overlay entries for pair {key}")
        overlay[key] = OverlayEdit(o["edit"], o.get("author", ""), o.get("ts", ""))
    return SimilarityGraph(
        tuple(doc["nodes"]), edges, overlay, int(doc.get("version", 0))
    )


def save_graph(graph: SimilarityGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(graph_to_json(graph))


def load_graph(path) -> SimilarityGraph:
    with open(path, "r", encoding="utf-8") as handle:
        return graph_from_json(handle.read())

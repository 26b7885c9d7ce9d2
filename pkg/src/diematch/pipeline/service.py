"""HTTP service backing the interactive graph editor.

Read endpoints serve immutable graph snapshots; edits go through a single
writer that journals every mutation, persists the new snapshot, and bumps
the version the clients reconcile against. Bearer-token auth guards
mutations only. Preview registration is capped at one job in flight.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import replace
from pathlib import Path

from fastapi import Depends, FastAPI, HTTPException, Query, Request, Response
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from ..diegraph import (
    CLEAR,
    SimilarityGraph,
    apply_edit,
    cluster,
    export_clusters,
    graph_to_json,
    load_graph,
    save_graph,
)
from ..errors import DieMatchError, UnknownNode
from ..geom3d import voxel_downsample
from ..register import RegistrationParams, register_pair
from .cache import stable_pair_seed
from .manifest import CorpusManifest

PREVIEW_MAX_POINTS = 20_000


class GraphStore:
    """Single-writer owner of the persisted graph and its edit journal."""

    def __init__(self, path):
        self.path = Path(path)
        self.journal_path = self.path.with_suffix(".journal.jsonl")
        self._graph = load_graph(self.path)
        self._lock = threading.Lock()

    @property
    def graph(self) -> SimilarityGraph:
        return self._graph

    def mutate(self, pair, edit, author) -> SimilarityGraph:
        with self._lock:
            new_graph = apply_edit(self._graph, pair, edit, author=author)
            save_graph(new_graph, self.path)
            with open(self.journal_path, "a", encoding="utf-8") as handle:
                handle.write(
                    json.dumps(
                        {
                            "ts": time.time(),
                            "a": pair[0],
                            "b": pair[1],
                            "edit": edit,
                            "author": author,
                            "version": new_graph.version,
                        },
                        sort_keys=True,
                    )
                    + "\n"
                )
            self._graph = new_graph
            return new_graph


class EditBody(BaseModel):
    a: str
    b: str
    edit: str
    author: str = "expert"


def _load_score_details(path) -> dict[tuple[str, str], dict]:
    details: dict[tuple[str, str], dict] = {}
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError:
                continue
            details[(record["a"], record["b"])] = record
    return details


def create_app(
    graph_path,
    manifest: CorpusManifest | None = None,
    scores_path=None,
    token: str | None = None,
    params: RegistrationParams = RegistrationParams(),
    ui_dir=None,
) -> FastAPI:
    store = GraphStore(graph_path)
    details = _load_score_details(scores_path) if scores_path else {}
    preview_slot = threading.BoundedSemaphore(1)

    app = FastAPI(title="diematch graph service")

    def require_token(request: Request):
        if token is None:
            return
        header = request.headers.get("authorization", "")
        if header != f"Bearer {token}":
            raise HTTPException(status_code=401, detail="missing or invalid bearer token")

    @app.get("/api/graph")
    def get_graph():
        return json.loads(graph_to_json(store.graph))

    @app.get("/api/clusters")
    def get_clusters(tau: float = Query(0.95, ge=0.0, le=1.0)):
        clustering = cluster(store.graph, tau)
        return {
            "tau": tau,
            "version": store.graph.version,
            "assignment": clustering.assignment,
            "clusters": [
                {"id": cid, "members": members}
                for cid, members in clustering.members().items()
            ],
        }

    @app.get("/api/clusters/export")
    def export(tau: float = Query(0.95, ge=0.0, le=1.0), format: str = "csv"):
        if format not in ("csv", "json"):
            raise HTTPException(status_code=400, detail="format must be csv or json")
        document = export_clusters(cluster(store.graph, tau), format)
        media = "text/csv" if format == "csv" else "application/json"
        return Response(content=document, media_type=media)

    @app.post("/api/edits", dependencies=[Depends(require_token)])
    def post_edit(body: EditBody):
        if body.edit not in ("forced_link", "forced_cut", "clear"):
            raise HTTPException(status_code=400, detail=f"unknown edit {body.edit!r}")
        try:
            graph = store.mutate((body.a, body.b), body.edit, body.author)
        except UnknownNode as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        return {"version": graph.version}

    @app.delete("/api/edits/{a}/{b}", dependencies=[Depends(require_token)])
    def delete_edit(a: str, b: str):
        try:
            graph = store.mutate((a, b), CLEAR, author="expert")
        except UnknownNode as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        return {"version": graph.version}

    @app.get("/api/pairs/{a}/{b}")
    def pair_detail(a: str, b: str):
        key = (a, b) if a <= b else (b, a)
        record = details.get(key)
        if record is None:
            raise HTTPException(status_code=404, detail=f"no score for pair {key}")
        return record

    @app.post("/api/pairs/{a}/{b}/preview")
    def pair_preview(a: str, b: str, voxel: float = Query(0.2, gt=0.0)):
        if manifest is None:
            raise HTTPException(status_code=404, detail="service has no scan manifest")
        if not preview_slot.acquire(blocking=False):
            raise HTTPException(status_code=429, detail="a preview job is already running")
        try:
            try:
                source = manifest.load_cloud(a, require_normals=True)
                target = manifest.load_cloud(b, require_normals=True)
            except KeyError as exc:
                raise HTTPException(status_code=404, detail=f"unknown scan {exc}")
            pair_params = replace(params, seed=stable_pair_seed(params.seed, a, b))
            try:
                reg = register_pair(source, target, "fpfh", pair_params)
            except DieMatchError as exc:
                raise HTTPException(status_code=502, detail=str(exc))
            src = voxel_downsample(source, voxel)
            tgt = voxel_downsample(target, voxel)
            aligned = reg.transform.transform_points(src.points)
            return {
                "pair": sorted((a, b)),
                "rmse": reg.rmse,
                "converged": reg.converged,
                "transform": {
                    "rotation": reg.transform.rotation.tolist(),
                    "translation": reg.transform.translation.tolist(),
                },
                "source_points": aligned[:PREVIEW_MAX_POINTS].tolist(),
                "target_points": tgt.points[:PREVIEW_MAX_POINTS].tolist(),
            }
        finally:
            preview_slot.release()

    @app.get("/api/scans/{scan_id}/points")
    def scan_points(scan_id: str, voxel: float = Query(0.2, gt=0.0)):
        if manifest is None:
            raise HTTPException(status_code=404, detail="service has no scan manifest")
        try:
            cloud = manifest.load_cloud(scan_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown scan {scan_id!r}")
        down = voxel_downsample(cloud, voxel)
        return {"id": scan_id, "voxel": voxel, "points": down.points[:PREVIEW_MAX_POINTS].tolist()}

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


def serve(
    graph_path,
    manifest: CorpusManifest | None = None,
    scores_path=None,
    host: str = "127.0.0.1",
    port: int = 8077,
    token: str | None = None,
    ui_dir=None,
) -> None:
    import uvicorn

    app = create_app(graph_path, manifest, scores_path, token=token, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port)

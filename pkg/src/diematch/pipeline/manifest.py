"""Corpus manifests: which scans exist, where, and what is known about them."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path

import numpy as np

from ..geom3d import PointCloud, RigidTransform, load_point_cloud

FACES = ("obverse_beard", "obverse_no_beard", "reverse")


@dataclass(frozen=True)
class ManifestEntry:
    id: str
    path: Path
    face: str = "obverse_no_beard"
    die: str | None = None
    split: str | None = None
    gt_transform: RigidTransform | None = None

    def __post_init__(self):
        if self.face not in FACES:
            raise ValueError(f"face must be one of {FACES}, got {self.face!r}")


@dataclass(frozen=True)
class CorpusManifest:
    entries: tuple[ManifestEntry, ...]

    def __post_init__(self):
        ids = [e.id for e in self.entries]
        if len(set(ids)) != len(ids):
            raise ValueError("scan ids must be unique")
        missing = [str(e.path) for e in self.entries if not Path(e.path).is_file()]
        if missing:
            raise FileNotFoundError(f"manifest references missing files: {missing[:5]}")

    def __len__(self) -> int:
        return len(self.entries)

    def ids(self) -> list[str]:
        return [e.id for e in self.entries]

    def by_id(self, scan_id: str) -> ManifestEntry:
        for entry in self.entries:
            if entry.id == scan_id:
                return entry
        raise KeyError(scan_id)

    def load_cloud(self, scan_id: str, require_normals: bool = False) -> PointCloud:
        entry = self.by_id(scan_id)
        return load_point_cloud(entry.path, require_normals=require_normals).with_id(entry.id)

    def all_pairs(self) -> list[tuple[str, str]]:
        """Every unordered scan pair, canonically ordered: x(x-1)/2 jobs."""
        return [tuple(sorted(p)) for p in combinations(sorted(self.ids()), 2)]

    def intra_die_pairs(self) -> dict[str, list[tuple[str, str]]]:
        """Pairs of scans sharing a die, keyed by die id (labeled entries only)."""
        by_die: dict[str, list[str]] = {}
        for entry in self.entries:
            if entry.die is not None:
                by_die.setdefault(entry.die, []).append(entry.id)
        return {
            die: [tuple(sorted(p)) for p in combinations(sorted(ids), 2)]
            for die, ids in sorted(by_die.items())
            if len(ids) >= 2
        }

    def die_labels(self) -> dict[str, str]:
        return {e.id: e.die for e in self.entries if e.die is not None}


def _transform_to_doc(t: RigidTransform) -> dict:
    return {"rotation": t.rotation.tolist(), "translation": t.translation.tolist()}


def _transform_from_doc(doc: dict) -> RigidTransform:
    return RigidTransform(np.asarray(doc["rotation"]), np.asarray(doc["translation"]))


def save_manifest(manifest: CorpusManifest, path) -> None:
    """Manifest JSON with scan paths stored relative to the manifest file."""
    path = Path(path)
    root = path.parent.resolve()
    entries = []
    for e in manifest.entries:
        scan_path = Path(e.path).resolve()
        try:
            rel = scan_path.relative_to(root)
        except ValueError:
            rel = scan_path
        doc = {"id": e.id, "path": str(rel), "face": e.face}
        if e.die is not None:
            doc["die"] = e.die
        if e.split is not None:
            doc["split"] = e.split
        if e.gt_transform is not None:
            doc["gt_transform"] = _transform_to_doc(e.gt_transform)
        entries.append(doc)
    path.write_text(json.dumps({"version": 1, "entries": entries}, indent=2) + "\n")


def load_manifest(path) -> CorpusManifest:
    path = Path(path)
    doc = json.loads(path.read_text())
    root = path.parent.resolve()
    entries = []
    for e in doc["entries"]:
        scan_path = Path(e["path"])
        if not scan_path.is_absolute():
            scan_path = root / scan_path
        entries.append(
            ManifestEntry(
                id=e["id"],
                path=scan_path,
                face=e.get("face", "obverse_no_beard"),
                die=e.get("die"),
                split=e.get("split"),
                gt_transform=(
                    _transform_from_doc(e["gt_transform"]) if "gt_transform" in e else None
                ),
            )
        )
    return CorpusManifest(tuple(entries))


def _face_from_id(scan_id: str) -> str:
    if scan_id.endswith("R"):
        return "reverse"
    return "obverse_no_beard"


def ingest_directory(directory, labels_csv=None) -> CorpusManifest:
    """Build a manifest from a directory of PLY scans.

    Ids come from file stems; faces from the dataset's LxD / LxR suffix
    convention. An optional labels CSV (columns: id, then any of die, face,
    split) attaches expert knowledge.
    """
    directory = Path(directory)
    labels: dict[str, dict] = {}
    if labels_csv is not None:
        with open(labels_csv, "r", encoding="utf-8", newline="") as handle:
            for row in csv.DictReader(handle):
                labels[row["id"]] = row
    entries = []
    for ply_path in sorted(directory.glob("*.ply")):
        scan_id = ply_path.stem
        row = labels.get(scan_id, {})
        entries.append(
            ManifestEntry(
                id=scan_id,
                path=ply_path.resolve(),
                face=row.get("face") or _face_from_id(scan_id),
                die=row.get("die") or None,
                split=row.get("split") or None,
            )
        )
    return CorpusManifest(tuple(entries))

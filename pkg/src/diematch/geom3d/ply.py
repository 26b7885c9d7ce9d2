"""PLY reading/writing for coin-face scans.

Supports ASCII and binary little-endian vertex payloads with float32/float64
coordinates, optional nx/ny/nz normals, and arbitrary extra scalar vertex
properties (colors etc.) which are parsed past and dropped. Face elements and
anything after the vertex element are ignored. Big-endian files are rejected.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..errors import EmptyCloud, MalformedPly, MissingNormals
from .cloud import PointCloud, renormalize

_SCALAR_TYPES = {
    "char": "i1", "int8": "i1",
    "uchar": "u1", "uint8": "u1",
    "short": "i2", "int16": "i2",
    "ushort": "u2", "uint16": "u2",
    "int": "i4", "int32": "i4",
    "uint": "u4", "uint32": "u4",
    "float": "f4", "float32": "f4",
    "double": "f8", "float64": "f8",
}
_FLOAT_TYPES = {"float", "float32", "double", "float64"}
_COORD_PROPS = ("x", "y", "z")
_NORMAL_PROPS = ("nx", "ny", "nz")


class _Element:
    def __init__(self, name: str, count: int):
        self.name = name
        self.count = count
        self.properties: list[tuple[str, str]] = []  # (name, ply type)
        self.has_list = False


def _read_header(handle) -> tuple[str, list[_Element]]:
    magic = handle.readline()
    if magic.strip() != b"ply":
        raise MalformedPly("missing 'ply' magic line")
    fmt = None
    elements: list[_Element] = []
    while True:
        raw = handle.readline()
        if not raw:
            raise MalformedPly("header ended before end_header")
        line = raw.decode("ascii", errors="replace").strip()
        if not line or line.startswith("comment") or line.startswith("obj_info"):
            continue
        if line == "end_header":
            break
        fields = line.split()
        if fields[0] == "format":
            if len(fields) < 2:
                raise MalformedPly("malformed format line")
            fmt = fields[1]
        elif fields[0] == "element":
            if len(fields) != 3:
                raise MalformedPly(f"malformed element line: {line!r}")
            try:
                count = int(fields[2])
            except ValueError as exc:
                raise MalformedPly(f"bad element count in {line!r}") from exc
            elements.append(_Element(fields[1], count))
        elif fields[0] == "property":
            if not elements:
                raise MalformedPly("property before any element")
            if fields[1] == "list":
                elements[-1].has_list = True
            else:
                if len(fields) != 3:
                    raise MalformedPly(f"malformed property line: {line!r}")
                ptype, pname = fields[1], fields[2]
                if ptype not in _SCALAR_TYPES:
                    raise MalformedPly(f"unsupported property type {ptype!r}")
                elements[-1].properties.append((pname, ptype))
    if fmt is None:
        raise MalformedPly("header has no format line")
    if fmt == "binary_big_endian":
        raise MalformedPly("big-endian PLY is not supported")
    if fmt not in ("ascii", "binary_little_endian"):
        raise MalformedPly(f"unknown PLY format {fmt!r}")
    return fmt, elements


def _vertex_dtype(element: _Element) -> np.dtype:
    return np.dtype([(name, "<" + _SCALAR_TYPES[ptype]) for name, ptype in element.properties])


def _read_binary_vertices(handle, elements: list[_Element], vertex: _Element) -> np.ndarray:
    for element in elements:
        if element is vertex:
            break
        if element.has_list:
            raise MalformedPly(
                f"element {element.name!r} with list properties precedes vertices; cannot skip"
            )
        handle.seek(element.count * _vertex_dtype(element).itemsize, 1)
    dtype = _vertex_dtype(vertex)
    raw = handle.read(vertex.count * dtype.itemsize)
    if len(raw) != vertex.count * dtype.itemsize:
        raise MalformedPly(
            f"vertex payload truncated: expected {vertex.count * dtype.itemsize} bytes, got {len(raw)}"
        )
    return np.frombuffer(raw, dtype=dtype, count=vertex.count)


def _read_ascii_vertices(handle, elements: list[_Element], vertex: _Element) -> np.ndarray:
    for element in elements:
        if element is vertex:
            break
        for _ in range(element.count):
            if not handle.readline():
                raise MalformedPly(f"payload truncated while skipping element {element.name!r}")
    names = [name for name, _ in vertex.properties]
    rows = np.empty((vertex.count, len(names)), dtype=np.float64)
    for i in range(vertex.count):
        line = handle.readline()
        if not line:
            raise MalformedPly(f"vertex payload truncated at row {i} of {vertex.count}")
        parts = line.split()
        if len(parts) < len(names):
            raise MalformedPly(f"vertex row {i} has {len(parts)} values, expected {len(names)}")
        try:
            rows[i] = [float(v) for v in parts[: len(names)]]
        except ValueError as exc:
            raise MalformedPly(f"non-numeric vertex value at row {i}") from exc
    out = np.empty(vertex.count, dtype=np.dtype([(n, "<f8") for n in names]))
    for j, name in enumerate(names):
        out[name] = rows[:, j]
    return out


def load_point_cloud(path, require_normals: bool = False) -> PointCloud:
    """Load a PLY scan; the scan id is the file stem.

    Normals are taken from nx/ny/nz when present and renormalized to unit
    length. `require_normals` turns their absence into an error instead of a
    cloud with `normals=None`.
    """
    path = Path(path)
    with open(path, "rb") as handle:
        fmt, elements = _read_header(handle)
        vertex = next((e for e in elements if e.name == "vertex"), None)
        if vertex is None:
            raise MalformedPly("no vertex element")
        prop_names = [name for name, _ in vertex.properties]
        for coord in _COORD_PROPS:
            if coord not in prop_names:
                raise MalformedPly(f"vertex element lacks {coord!r} property")
        for name, ptype in vertex.properties:
            if name in _COORD_PROPS + _NORMAL_PROPS and ptype not in _FLOAT_TYPES:
                raise MalformedPly(f"property {name!r} must be float32/float64, is {ptype!r}")
        if vertex.has_list:
            raise MalformedPly("vertex element with list property is not supported")
        if vertex.count == 0:
            raise EmptyCloud(f"{path.name}: zero vertices")

        if fmt == "binary_little_endian":
            data = _read_binary_vertices(handle, elements, vertex)
        else:
            data = _read_ascii_vertices(handle, elements, vertex)

    points = np.stack([data[c].astype(np.float64) for c in _COORD_PROPS], axis=1)
    has_normals = all(n in prop_names for n in _NORMAL_PROPS)
    if require_normals and not has_normals:
        raise MissingNormals(f"{path.name}: no nx/ny/nz properties")
    normals = None
    if has_normals:
        raw = np.stack([data[n].astype(np.float64) for n in _NORMAL_PROPS], axis=1)
        if np.any(np.linalg.norm(raw, axis=1) < 1e-12):
            raise MalformedPly(f"{path.name}: zero-length normal cannot be renormalized")
        normals = renormalize(raw, keep_within=1e-9)
    if not np.all(np.isfinite(points)):
        raise MalformedPly(f"{path.name}: non-finite coordinates")
    return PointCloud(points, normals, id=path.stem)


def save_point_cloud(cloud: PointCloud, path, binary: bool = True) -> None:
    """Write x,y,z (and normals when present) as float64; binary round-trips bit-for-bit."""
    path = Path(path)
    names = list(_COORD_PROPS) + (list(_NORMAL_PROPS) if cloud.normals is not None else [])
    header = ["ply"]
    header.append("format binary_little_endian 1.0" if binary else "format ascii 1.0")
    header.append(f"element vertex {len(cloud)}")
    header.extend(f"property double {name}" for name in names)
    header.append("end_header")

    columns = [cloud.points]
    if cloud.normals is not None:
        columns.append(cloud.normals)
    table = np.hstack(columns).astype("<f8")

    with open(path, "wb") as handle:
        handle.write(("\n".join(header) + "\n").encode("ascii"))
        if binary:
            handle.write(table.tobytes())
        else:
            for row in table:
                handle.write((" ".join(repr(float(v)) for v in row) + "\n").encode("ascii"))

"""Input parsing and deterministic report output."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .errors import InputError, NonPositiveEdge, ParseError
from .metric import FiniteGeodesicSpace, build_space

SCHEMA_VERSION = "1"


def _read_text(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except UnicodeDecodeError:
        raise ParseError(f"{path} is not UTF-8") from None


def read_json(path) -> dict:
    try:
        return json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from None


def _vertex_id(v):
    if isinstance(v, bool) or not isinstance(v, (str, int)):
        raise ParseError(f"vertex ids must be strings or integers, got {v!r}")
    return v


def graph_from_dict(obj) -> FiniteGeodesicSpace:
    """``{"vertices": [...], "edges": [[u, v, length], ...]}``."""
    if not isinstance(obj, dict) or "edges" not in obj:
        raise ParseError('graph JSON must be an object with an "edges" list')
    edges = obj["edges"]
    verts = obj.get("vertices")
    if not isinstance(edges, list) or (verts is not None and not isinstance(verts, list)):
        raise ParseError('"edges" and "vertices" must be lists')
    known = None if verts is None else {_vertex_id(v) for v in verts}
    triples = []
    for e in edges:
        if not isinstance(e, list) or len(e) != 3:
            raise ParseError(f"edge must be [u, v, length], got {e!r}")
        u, v, w = _vertex_id(e[0]), _vertex_id(e[1]), e[2]
        if isinstance(w, bool) or not isinstance(w, (int, float)):
            raise ParseError(f"edge length must be a number, got {w!r}")
        if known is not None and (u not in known or v not in known):
            raise InputError(f"edge {e!r} uses a vertex missing from \"vertices\"")
        triples.append((u, v, w))
    return build_space(triples, vertices=known)


def load_graph(path) -> FiniteGeodesicSpace:
    return graph_from_dict(read_json(path))


def read_points(path) -> np.ndarray:
    """Point-cloud CSV: one point per row, an optional header row is skipped."""
    rows = []
    for lineno, row in enumerate(csv.reader(io.StringIO(_read_text(path))), 1):
        if not row or all(not c.strip() for c in row):
            continue
        try:
            rows.append([float(c) for c in row])
        except ValueError:
            if lineno == 1 and not rows:
                continue
            raise ParseError(f"{path}:{lineno}: non-numeric value in {row!r}") from None
    if not rows:
        raise ParseError(f"{path}: no points")
    if len({len(r) for r in rows}) != 1:
        raise ParseError(f"{path}: rows have different lengths")
    pts = np.asarray(rows, dtype=float)
    if not np.all(np.isfinite(pts)):
        raise ParseError(f"{path}: non-finite coordinate")
    return pts


def knn_space(points: np.ndarray, k: int = 8) -> FiniteGeodesicSpace:
    """Symmetric k-nearest-neighbour graph with Euclidean edge lengths; vertex ``i`` is row ``i``."""
    n = len(points)
    if k < 1:
        raise InputError("k must be >= 1")
    if n == 1:
        return build_space([], vertices=[0])
    kk = min(k + 1, n)
    dist, idx = cKDTree(points).query(points, k=kk)
    edges = []
    for i in range(n):
        for d, j in zip(dist[i][1:], idx[i][1:]):
            if d <= 0:
                raise NonPositiveEdge(f"points {i} and {int(j)} coincide")
            edges.append((i, int(j), float(d)))
    return build_space(edges, vertices=range(n))


def load_points(path, k: int = 8) -> FiniteGeodesicSpace:
    return knn_space(read_points(path), k)


def resolve_vertex(space: FiniteGeodesicSpace, token):
    """Vertex id from a command-line token (string ids first, then integers)."""
    if token in space:
        return token
    try:
        as_int = int(token)
    except (TypeError, ValueError):
        as_int = None
    if as_int is not None and as_int in space:
        return as_int
    raise InputError(f"unknown vertex {token!r}")


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def dumps_report(obj: dict) -> str:
    """Canonical JSON: sorted keys, fixed indentation, no NaN or infinities."""
    body = {"schema_version": SCHEMA_VERSION, **obj}
    return json.dumps(to_jsonable(body), sort_keys=True, indent=2, ensure_ascii=False,
                      allow_nan=False) + "\n"


def fmt_float(x) -> str:
    return format(float(x), ".17g")


def write_csv(path_or_stream, header, rows) -> None:
    def emit(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt_float(c) if isinstance(c, (float, np.floating)) else c for c in row])
    if hasattr(path_or_stream, "write"):
        emit(path_or_stream)
        return
    with open(path_or_stream, "w", encoding="utf-8", newline="") as fh:
        emit(fh)

"""Finite geodesic spaces: weighted graphs with their shortest-path metric.

Vertices are stored in a canonical order (integers numerically, everything
else by ``str``) and every tie in this package is broken by that order, so
all outputs are reproducible.  Public functions take and return vertex ids;
the ``*_idx`` helpers work on integer indices and are what the other modules
use internally.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Hashable, Iterable, Sequence
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, dijkstra

from .errors import (
    DisconnectedGraph,
    EmptyTarget,
    InputError,
    NonPositiveEdge,
    TargetNotInSet,
)

log = logging.getLogger(__name__)

#: Spaces with at most this many vertices keep the full distance matrix.
#: Above it rows are computed on demand and kept in an LRU cache.
DENSE_LIMIT = 5000
ROW_CACHE_SIZE = 4096

# Guard against round-off when comparing sums of edge lengths computed along
# different paths.  Scaled by the space's edge scale.
TIE_RTOL = 1e-9

VertexId = Hashable


def _id_key(v):
    if isinstance(v, (bool, np.bool_)):
        return (1, str(v))
    if isinstance(v, (int, np.integer)):
        return (0, int(v), "")
    return (1, str(v))


class FiniteGeodesicSpace:
    """Connected weighted graph with exact geodesic distances.

    Build with :func:`build_space`; instances are immutable afterwards.
    """

    def __init__(self, vertices: Sequence[VertexId], graph: csr_matrix,
                 dense_limit: int = DENSE_LIMIT):
        self.vertices: tuple = tuple(vertices)
        self._index = {v: i for i, v in enumerate(self.vertices)}
        self.graph = graph
        self.n = len(self.vertices)
        self.scale = float(graph.data.max()) if graph.nnz else 0.0
        self.eps = TIE_RTOL * max(self.scale, 1.0)
        self.dense = self.n <= dense_limit
        if self.dense:
            d = dijkstra(graph, directed=False)
            d = np.minimum(d, d.T)
            np.fill_diagonal(d, 0.0)
            d.setflags(write=False)
            self._dist = d
        else:
            self._dist = None
            self._row = lru_cache(maxsize=ROW_CACHE_SIZE)(self._compute_row)

    # -- lookup ---------------------------------------------------------
    def index(self, v: VertexId) -> int:
        try:
            return self._index[v]
        except KeyError:
            raise InputError(f"unknown vertex {v!r}") from None

    def indices(self, vs: Iterable[VertexId]) -> np.ndarray:
        idx = sorted({self.index(v) for v in vs})
        return np.asarray(idx, dtype=np.int64)

    def ids(self, idx: Iterable[int]) -> frozenset:
        return frozenset(self.vertices[int(i)] for i in idx)

    def __contains__(self, v) -> bool:
        return v in self._index

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        mode = "dense" if self.dense else "lazy"
        return f"FiniteGeodesicSpace(n={self.n}, edges={self.graph.nnz // 2}, {mode})"

    # -- distances ------------------------------------------------------
    @property
    def dist_matrix(self) -> np.ndarray | None:
        """Full distance matrix, or ``None`` for lazily evaluated spaces."""
        return self._dist

    def _compute_row(self, i: int) -> np.ndarray:
        r = dijkstra(self.graph, directed=False, indices=i)
        r[i] = 0.0
        r.setflags(write=False)
        return r

    def row(self, i: int) -> np.ndarray:
        if self._dist is not None:
            return self._dist[i]
        return self._row(int(i))

    def rows(self, idx: Sequence[int]) -> np.ndarray:
        idx = np.asarray(idx, dtype=np.int64)
        if self._dist is not None:
            return self._dist[idx]
        return np.stack([self.row(i) for i in idx]) if len(idx) else np.empty((0, self.n))

    def d(self, i: int, j: int) -> float:
        return float(self.row(i)[j])

    def dist(self, u: VertexId, v: VertexId) -> float:
        return self.d(self.index(u), self.index(v))

    def dist_to_set(self, idx: Sequence[int]) -> np.ndarray:
        """Distance from every vertex to the index set ``idx``."""
        idx = np.asarray(idx, dtype=np.int64)
        if idx.size == 0:
            raise EmptyTarget("distance to an empty set")
        if self._dist is not None:
            out = np.full(self.n, np.inf)
            for lo in range(0, idx.size, 512):
                np.minimum(out, self._dist[idx[lo:lo + 512]].min(axis=0), out=out)
            return out
        out = dijkstra(self.graph, directed=False, indices=idx, min_only=True)
        out[idx] = 0.0
        return out

    def neighbors(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        g = self.graph
        lo, hi = g.indptr[i], g.indptr[i + 1]
        return g.indices[lo:hi], g.data[lo:hi]

    def edges(self):
        """Yield ``(i, j, length)`` with ``i < j``."""
        coo = self.graph.tocoo()
        for i, j, w in zip(coo.row, coo.col, coo.data):
            if i < j:
                yield int(i), int(j), float(w)

    def diameter(self) -> float:
        if self._dist is not None:
            return float(self._dist.max())
        return float(max(self.row(i).max() for i in range(self.n)))


def build_space(edge_list: Iterable[Sequence], vertices: Iterable[VertexId] | None = None,
                dense_limit: int = DENSE_LIMIT) -> FiniteGeodesicSpace:
    """Build a space from ``(u, v, length)`` triples.

    Duplicate edges keep the shorter length (with a warning).  Self-loops are
    dropped.  Raises ``NonPositiveEdge`` or ``DisconnectedGraph``.
    """
    lengths: dict[tuple, float] = {}
    ids = set(vertices) if vertices is not None else set()
    for e in edge_list:
        if len(e) != 3:
            raise InputError(f"edge must be (u, v, length), got {e!r}")
        u, v, w = e
        w = float(w)
        if not w > 0 or not math.isfinite(w):
            raise NonPositiveEdge(f"edge ({u!r}, {v!r}) has length {w}")
        ids.update((u, v))
        if u == v:
            continue
        key = (u, v) if _id_key(u) <= _id_key(v) else (v, u)
        if key in lengths:
            log.warning("duplicate edge %r, keeping the shorter length", key)
            w = min(w, lengths[key])
        lengths[key] = w
    if not ids:
        raise InputError("empty graph")
    order = sorted(ids, key=_id_key)
    index = {v: i for i, v in enumerate(order)}
    n = len(order)
    if lengths:
        rows = np.fromiter((index[a] for a, _ in lengths), dtype=np.int64, count=len(lengths))
        cols = np.fromiter((index[b] for _, b in lengths), dtype=np.int64, count=len(lengths))
        data = np.fromiter(lengths.values(), dtype=float, count=len(lengths))
    else:
        rows = cols = np.empty(0, dtype=np.int64)
        data = np.empty(0)
    graph = csr_matrix((np.concatenate([data, data]),
                        (np.concatenate([rows, cols]), np.concatenate([cols, rows]))),
                       shape=(n, n))
    graph.sort_indices()
    ncomp, _ = connected_components(graph, directed=False)
    if ncomp != 1:
        raise DisconnectedGraph(f"graph has {ncomp} connected components")
    return FiniteGeodesicSpace(order, graph, dense_limit=dense_limit)


@dataclass(frozen=True)
class DiscreteSegment:
    """A vertex path with cumulative arclength parameters.

    ``geo_defect`` is ``max_{i<j} |d(v_i, v_j) - (t_j - t_i)|``.  Since a path is
    never shorter than the distance between any two of its vertices, the
    maximum is attained at the endpoints, so it equals ``length - d(v_0, v_m)``.
    ``heuristic`` marks segments from a search that may be sub-maximal.
    """

    path: tuple
    params: tuple
    geo_defect: float
    indices: np.ndarray = field(repr=False, compare=False)
    heuristic: bool = False

    @property
    def length(self) -> float:
        return self.params[-1]

    @property
    def start(self):
        return self.path[0]

    @property
    def end(self):
        return self.path[-1]

    def __len__(self) -> int:
        return len(self.path)

    def param_array(self) -> np.ndarray:
        return np.asarray(self.params, dtype=float)

    def sub(self, lo: float, hi: float) -> np.ndarray:
        """Indices of the vertices with parameter in ``[lo, hi]``."""
        p = self.param_array()
        return self.indices[(p >= lo) & (p <= hi)]

    def to_dict(self) -> dict:
        return {
            "path": list(self.path),
            "params": list(self.params),
            "length": self.length,
            "geo_defect": self.geo_defect,
            "heuristic": self.heuristic,
        }


def segment_from_indices(space: FiniteGeodesicSpace, idx: Sequence[int],
                         heuristic: bool = False) -> DiscreteSegment:
    idx = np.asarray(idx, dtype=np.int64)
    if idx.size > 1:
        w = np.asarray(space.graph[idx[:-1], idx[1:]]).ravel()
        if np.any(w <= 0):
            k = int(np.flatnonzero(w <= 0)[0])
            raise InputError(f"{space.vertices[idx[k]]!r} and {space.vertices[idx[k + 1]]!r} "
                             "are not adjacent")
        params = np.concatenate([[0.0], np.cumsum(w)])
    else:
        params = np.zeros(1)
    defect = max(0.0, float(params[-1]) - space.d(int(idx[0]), int(idx[-1])))
    verts = space.vertices
    return DiscreteSegment(tuple(verts[i] for i in idx.tolist()), tuple(params.tolist()),
                           defect, idx, heuristic)


def segment_from_path(space: FiniteGeodesicSpace, path: Sequence[VertexId]) -> DiscreteSegment:
    return segment_from_indices(space, [space.index(v) for v in path])


def next_hops(space: FiniteGeodesicSpace, j: int) -> np.ndarray:
    """For every vertex, the smallest neighbour lying on a shortest path to ``j``."""
    g = space.graph
    to_j = space.row(j)
    src = np.repeat(np.arange(space.n), np.diff(g.indptr))
    ok = g.data + to_j[g.indices] <= to_j[src] + space.eps
    cand = np.where(ok, g.indices, space.n)
    hop = np.minimum.reduceat(cand, g.indptr[:-1]) if cand.size else np.full(space.n, space.n)
    hop[np.diff(g.indptr) == 0] = space.n
    hop[j] = j
    return hop


def canonical_path_idx(space: FiniteGeodesicSpace, i: int, j: int,
                       hops: np.ndarray | None = None) -> list[int]:
    """Shortest path from ``i`` to ``j`` taking the smallest admissible next vertex."""
    if hops is None:
        hops = next_hops(space, j)
    path = [i]
    cur = i
    while cur != j:
        cur = int(hops[cur])
        path.append(cur)
    return path


def shortest_segment(space: FiniteGeodesicSpace, u: VertexId, v: VertexId) -> DiscreteSegment:
    return segment_from_indices(space, canonical_path_idx(space, space.index(u), space.index(v)))


def _target(space, K) -> np.ndarray:
    idx = space.indices(K)
    if idx.size == 0:
        raise EmptyTarget("target set is empty")
    return idx


def project_idx(space: FiniteGeodesicSpace, K: np.ndarray, x: int) -> np.ndarray:
    d = space.row(x)[K]
    return K[d <= d.min() + space.eps]


def project(space: FiniteGeodesicSpace, K: Iterable[VertexId], x: VertexId) -> frozenset:
    """Nearest points of ``K`` to ``x`` (all of them)."""
    return space.ids(project_idx(space, _target(space, K), space.index(x)))


def inverse_project_idx(space: FiniteGeodesicSpace, K: np.ndarray, y: int,
                        tol: float | None = None) -> np.ndarray:
    if tol is None:
        tol = space.scale
    dK = space.dist_to_set(K)
    return np.flatnonzero(space.row(y) <= dK + tol + space.eps)


def inverse_project(space: FiniteGeodesicSpace, K: Iterable[VertexId], y: VertexId,
                    tol: float | None = None) -> frozenset:
    """Vertices ``x`` with ``d(x, K) >= d(x, y) - tol``.

    ``tol`` defaults to one edge scale; ``tol=0`` gives the literal fiber.
    """
    K = _target(space, K)
    yi = space.index(y)
    if yi not in set(K.tolist()):
        raise TargetNotInSet(f"{y!r} is not in the target set")
    return space.ids(inverse_project_idx(space, K, yi, tol))


def neighborhood(space: FiniteGeodesicSpace, A: Iterable[VertexId], r: float) -> frozenset:
    """Open ``r``-neighbourhood ``{x : d(x, A) < r}``."""
    dA = space.dist_to_set(_target(space, A))
    return space.ids(np.flatnonzero(dA < r))


def is_net(space: FiniteGeodesicSpace, S: Iterable[VertexId], A: Iterable[VertexId],
           eps: float) -> bool:
    A = space.indices(A)
    if A.size == 0:
        return True
    S = space.indices(S)
    if S.size == 0:
        return False
    return bool(np.all(space.dist_to_set(S)[A] <= eps + space.eps))


def farthest_pair_idx(space: FiniteGeodesicSpace) -> tuple[int, int]:
    """Exhaustive diameter pair, lexicographically first among ties."""
    if space.dist_matrix is not None:
        flat = int(np.argmax(space.dist_matrix))
        return divmod(flat, space.n)
    best, pair = -1.0, (0, 0)
    for i in range(space.n):
        r = space.row(i)
        j = int(np.argmax(r))
        if r[j] > best:
            best, pair = float(r[j]), (i, j)
    return pair


def double_sweep_idx(space: FiniteGeodesicSpace, start: int = 0) -> tuple[int, int]:
    a = int(np.argmax(space.row(start)))
    b = int(np.argmax(space.row(a)))
    return (a, b) if a <= b else (b, a)


def maximal_segment(space: FiniteGeodesicSpace, mode: str = "auto") -> DiscreteSegment:
    """Longest segment.

    ``exhaustive`` returns a diameter-realizing segment; ``double_sweep`` is
    two farthest-point sweeps from the first vertex and is flagged
    ``heuristic``.  ``auto`` is exhaustive for dense spaces only.
    """
    if mode == "auto":
        mode = "exhaustive" if space.dense else "double_sweep"
    if mode == "exhaustive":
        i, j = farthest_pair_idx(space)
        return segment_from_indices(space, canonical_path_idx(space, i, j))
    if mode == "double_sweep":
        i, j = double_sweep_idx(space)
        return segment_from_indices(space, canonical_path_idx(space, i, j), heuristic=True)
    raise ValueError(f"unknown mode {mode!r}")


def covering_radius_idx(space: FiniteGeodesicSpace, support: Sequence[int]) -> float:
    return float(space.dist_to_set(support).max())

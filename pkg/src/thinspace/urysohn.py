"""Explicit 1-Urysohn width maps built from a skeleton, and their fiber diameters.

Three constructions, chosen from the skeleton:

``distance``  segment skeleton: ``f(x) = d(phi(0), x)`` into an interval.
``signed``    segment skeleton with mass farther than ``1000R`` from the
              midpoint on both sides (the finite stand-in for a line):
              ``f(x) = +-d(B, x)`` with ``B`` the ``1000R``-ball at the
              midpoint and the sign from the side ``x`` projects to.
``two_ball``  circle skeleton: balls ``B1``, ``B2`` of radius ``1000R`` at
              antipodal support points; ``f`` maps onto a circle of length
              ``2 d(B1, B2)``.
``constant``  circle skeleton whose two balls meet, so ``two_ball`` is undefined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import dijkstra

from .errors import AmbiguousSide, SkeletonMismatch
from .metric import FiniteGeodesicSpace
from .skeleton import Skeleton

BALL_FACTOR = 1000
BOUND_FACTOR = 2000
LIPSCHITZ_ALL_PAIRS = 500


@dataclass(frozen=True)
class UrysohnMap:
    target: str
    case: str
    values: np.ndarray = field(repr=False)
    period: float | None
    params: dict
    delta_bin: float
    fiber_stats: tuple = field(default=(), repr=False)

    @property
    def max_fiber_diameter(self) -> float:
        return max((d for _, d in self.fiber_stats), default=0.0)

    @property
    def bound(self) -> float:
        return BOUND_FACTOR * self.params["R"] + 2 * self.delta_bin

    def gap(self, a, b):
        """Distance between values in the target (circle metric when periodic)."""
        g = np.abs(np.asarray(a) - np.asarray(b))
        if self.period is not None:
            g = np.minimum(g, self.period - g)
        return g

    def summary(self) -> dict:
        return {
            "target": self.target,
            "case": self.case,
            "period": self.period,
            "params": dict(self.params),
            "delta_bin": self.delta_bin,
            "bins": len(self.fiber_stats),
            "max_fiber_diameter": self.max_fiber_diameter,
            "bound": self.bound,
            "fiber_stats": [[c, d] for c, d in self.fiber_stats],
        }


def _ball_distance(space: FiniteGeodesicSpace, center: int, radius: float):
    """Members of the open ball and the distance from every vertex to it."""
    ball = np.flatnonzero(space.row(center) < radius)
    return ball, space.dist_to_set(ball)


def _sides(space, support_idx, positive, negative):
    d_all = space.dist_to_set(support_idx)
    in_pos = space.dist_to_set(positive) <= d_all + space.eps
    in_neg = space.dist_to_set(negative) <= d_all + space.eps
    return in_pos, in_neg


def build_urysohn_map(space: FiniteGeodesicSpace, skeleton: Skeleton, R: float,
                      delta_bin: float | None = None) -> UrysohnMap:
    if delta_bin is None:
        delta_bin = R / 10
    if skeleton.support.indices.size == 0 or skeleton.support.indices.max() >= space.n:
        raise SkeletonMismatch("skeleton does not live on this space")
    if any(v not in space for v in skeleton.support.path):
        raise SkeletonMismatch("skeleton vertices are not vertices of this space")
    if not math.isclose(skeleton.R, R):
        raise SkeletonMismatch(f"skeleton was extracted with R={skeleton.R}, not R={R}")
    radius = BALL_FACTOR * R
    sup = skeleton.support.indices
    s = skeleton.support.param_array()
    tol = space.scale

    if skeleton.kind == "segment":
        mid_pos = int(np.argmin(np.abs(s - s[-1] / 2)))
        mid = int(sup[mid_pos])
        in_pos, in_neg = _sides(space, sup, sup[mid_pos:], sup[:mid_pos + 1])
        d_mid = space.row(mid)
        two_sided = (np.any(d_mid[in_pos & ~in_neg] > radius)
                     and np.any(d_mid[in_neg & ~in_pos] > radius))
        if not two_sided:
            base = int(sup[0])
            values = np.asarray(space.row(base), dtype=float).copy()
            params = {"R": R, "base": space.vertices[base]}
            return _finish(space, "interval", "distance", values, None, params, delta_bin)
        _, d_B = _ball_distance(space, mid, radius)
        both = in_pos & in_neg & (d_B > tol)
        if both.any():
            x = int(np.flatnonzero(both)[0])
            raise AmbiguousSide(f"{space.vertices[x]!r} projects to both sides outside the base ball")
        values = np.where(in_pos, d_B, -d_B)
        params = {"R": R, "base": space.vertices[mid], "ball_radius": radius}
        return _finish(space, "interval", "signed", values, None, params, delta_bin)

    # circle
    L = skeleton.support.length
    anti_pos = int(np.argmin(np.abs(s - L / 2)))
    p0, p1 = int(sup[0]), int(sup[anti_pos])
    B1, d_B1 = _ball_distance(space, p0, radius)
    B2, d_B2 = _ball_distance(space, p1, radius)
    gap12 = float(d_B1[B2].min())
    if gap12 <= 0:
        values = np.zeros(space.n)
        params = {"R": R, "base": space.vertices[p0], "antipode": space.vertices[p1],
                  "ball_radius": radius, "fallback": "balls intersect"}
        return _finish(space, "interval", "constant", values, None, params, delta_bin)
    first = sup[:anti_pos + 1]
    second = np.append(sup[anti_pos:], sup[0])
    in_first, in_second = _sides(space, sup, first, second)
    both = in_first & in_second & (np.minimum(d_B1, d_B2) > tol)
    if both.any():
        x = int(np.flatnonzero(both)[0])
        raise AmbiguousSide(f"{space.vertices[x]!r} projects to both halves outside the balls")
    period = 2 * gap12
    values = np.where(in_first, np.minimum(d_B1, gap12),
                      np.minimum(gap12 + d_B2, period))
    values = np.mod(values, period)
    params = {"R": R, "base": space.vertices[p0], "antipode": space.vertices[p1],
              "ball_radius": radius, "ball_gap": gap12}
    return _finish(space, "circle", "two_ball", values, period, params, delta_bin)


def _finish(space, target, case, values, period, params, delta_bin) -> UrysohnMap:
    m = UrysohnMap(target, case, values, period, params, delta_bin)
    stats = fiber_diameters(space, m, delta_bin)
    return UrysohnMap(target, case, values, period, params, delta_bin, tuple(stats))


def bin_labels(values: np.ndarray, delta: float, period: float | None = None) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    if period is not None:
        v = np.mod(v, period)
        nbins = max(1, math.ceil(period / delta))
        return np.minimum(np.floor(v / delta), nbins - 1).astype(np.int64)
    return np.floor(v / delta).astype(np.int64)


def _bounded_diameter(graph, pos: np.ndarray) -> float:
    """Exact diameter of the vertex set ``pos`` in ``graph`` by eccentricity bounds.

    After a single-source run from a member ``v`` with eccentricity ``e``
    (over the set), every member ``w`` has ``max(d(v,w), e - d(v,w)) <=
    ecc(w) <= e + d(v,w)``.  Members whose upper bound cannot beat the best
    eccentricity found are dropped; sources alternate between the largest
    upper bound and the smallest lower bound.
    """
    m = pos.size
    lo = np.zeros(m)
    hi = np.full(m, np.inf)
    active = np.ones(m, dtype=bool)
    best = 0.0
    high = True
    while active.any():
        cand = np.flatnonzero(active)
        k = int(cand[np.argmax(hi[cand])] if high else cand[np.argmin(lo[cand])])
        high = not high
        d = dijkstra(graph, directed=False, indices=int(pos[k]))[pos]
        ecc = float(d.max())
        if not math.isfinite(ecc):
            return math.inf
        best = max(best, ecc)
        np.maximum(lo, np.maximum(d, ecc - d), out=lo)
        np.minimum(hi, ecc + d, out=hi)
        active[k] = False
        active &= hi > best
    return best


def set_diameter(space: FiniteGeodesicSpace, members: np.ndarray) -> float:
    """Exact diameter of a vertex set.

    Lazy spaces use Dijkstra restricted to the ``lim``-neighbourhood of the
    set, doubling ``lim`` until the diameter found is at most ``lim``; such
    distances are realized inside the neighbourhood, so they are exact.
    """
    members = np.asarray(members, dtype=np.int64)
    if members.size <= 1:
        return 0.0
    if space.dist_matrix is not None:
        return float(space.dist_matrix[np.ix_(members, members)].max())
    lim = 4 * space.scale
    while True:
        reach = dijkstra(space.graph, directed=False, indices=members, min_only=True, limit=lim)
        local = np.flatnonzero(np.isfinite(reach))
        sub = space.graph[local][:, local]
        diam = _bounded_diameter(sub, np.searchsorted(local, members))
        if diam <= lim or local.size == space.n:
            return diam
        lim *= 2


def _window(sorted_vals, order, lo, hi, period):
    """Indices of the vertices whose value lies in ``[lo, hi]`` (circularly when periodic)."""
    if period is not None:
        if hi - lo >= period:
            return np.sort(order)
        parts = []
        for shift in (-period, 0.0, period):
            a = np.searchsorted(sorted_vals, lo + shift, "left")
            b = np.searchsorted(sorted_vals, hi + shift, "right")
            parts.append(order[a:b])
        return np.unique(np.concatenate(parts))
    a = np.searchsorted(sorted_vals, lo, "left")
    b = np.searchsorted(sorted_vals, hi, "right")
    return np.sort(order[a:b])


def _windowed_diameter(space, members, lo, hi, sorted_vals, order, period) -> float:
    # A 1-Lipschitz map keeps every path of length <= lim from the bin inside
    # the value window widened by lim, so distances <= lim found in the
    # window subgraph are exact.
    lim = (hi - lo) + 4 * space.scale
    while True:
        local = _window(sorted_vals, order, lo - lim, hi + lim, period)
        sub = space.graph[local][:, local]
        diam = _bounded_diameter(sub, np.searchsorted(local, members))
        if diam <= lim or local.size == space.n:
            return diam
        lim *= 2


def fiber_diameters(space: FiniteGeodesicSpace, umap: UrysohnMap,
                    delta_bin: float | None = None) -> list[tuple[float, float]]:
    """``(bin_center, diameter)`` for every non-empty bin of width ``delta_bin``.

    Diameters are exact.  Lazily evaluated spaces use the map's
    1-Lipschitz property to work on a small subgraph per bin.
    """
    delta = umap.delta_bin if delta_bin is None else delta_bin
    labels = bin_labels(umap.values, delta, umap.period)
    order = np.argsort(labels, kind="stable")
    labels_sorted = labels[order]
    cuts = np.flatnonzero(np.diff(labels_sorted)) + 1
    lazy = space.dist_matrix is None
    if lazy:
        vals = np.asarray(umap.values, dtype=float)
        if umap.period is not None:
            vals = np.mod(vals, umap.period)
        vorder = np.argsort(vals, kind="stable")
        svals = vals[vorder]
    out = []
    for grp in np.split(order, cuts):
        k = int(labels[grp[0]])
        if lazy and grp.size > 1:
            members = np.sort(grp)
            lo, hi = float(vals[members].min()), float(vals[members].max())
            diam = _windowed_diameter(space, members, lo, hi, svals, vorder, umap.period)
        else:
            diam = set_diameter(space, grp)
        out.append(((k + 0.5) * delta, diam))
    return out


def lipschitz_defect(space: FiniteGeodesicSpace, umap: UrysohnMap, *, max_pairs: int = 200_000,
                     seed: int = 0) -> float:
    """``max(|f(x) - f(y)| - d(x, y))`` over all pairs (small spaces) or a seeded sample."""
    v = umap.values
    if space.n <= LIPSCHITZ_ALL_PAIRS and space.dist_matrix is not None:
        gap = umap.gap(v[:, None], v[None, :])
        return float((gap - space.dist_matrix).max())
    rng = np.random.default_rng(seed)
    srcs = rng.choice(space.n, size=min(space.n, max(1, max_pairs // space.n)), replace=False)
    worst = -math.inf
    for i in np.sort(srcs):
        worst = max(worst, float((umap.gap(v[i], v) - space.row(int(i))).max()))
    return worst


def edge_defect(space: FiniteGeodesicSpace, umap: UrysohnMap) -> float:
    """``max(|f(u) - f(v)| - length(u, v))`` over edges."""
    coo = space.graph.tocoo()
    return float((umap.gap(umap.values[coo.row], umap.values[coo.col]) - coo.data).max())

"""One-dimensional skeletons of thin spaces: a longest segment or an isometric loop.

The branch is keyed on the covering radius of a maximal segment ``l``:
within ``200R`` the segment is the skeleton.  Otherwise a far point ``p``
and the segments from ``p`` to both ends of ``l`` give three anchor
intervals (radius ``5R`` around each midpoint), and the skeleton is the
shortest loop passing within ``D`` of all three.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AnchorsOverlap,
    CircleBranchUnreachable,
    EmptyAnchorNeighborhood,
    InputError,
    NotThinEvidence,
    SkeletonMismatch,
)
from .metric import (
    DiscreteSegment,
    FiniteGeodesicSpace,
    canonical_path_idx,
    covering_radius_idx,
    maximal_segment,
    segment_from_indices,
)
from .thinness import ThinnessReport

COVER_FACTOR = 200
ANCHOR_RADIUS = 5
MIN_LOOP_FACTOR = 50
MAX_DISTORTION_PAIRS_VERTICES = 2000


@dataclass(frozen=True)
class Cycle:
    """Closed vertex walk ``v_0 .. v_{m-1}`` (``v_m = v_0`` implied) with arclengths."""

    path: tuple
    params: tuple
    length: float
    indices: np.ndarray = field(repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.path)

    def param_array(self) -> np.ndarray:
        return np.asarray(self.params, dtype=float)

    def to_dict(self) -> dict:
        return {"path": list(self.path), "params": list(self.params), "length": self.length}


@dataclass(frozen=True)
class AnchorTriple:
    """Sub-paths of ``gamma_1``, ``gamma_2`` and ``l`` around their midpoints."""

    intervals: tuple
    segments: tuple = field(repr=False)

    @classmethod
    def from_segments(cls, segments: Sequence[DiscreteSegment], R: float) -> AnchorTriple:
        ivs = []
        for s in segments:
            mid = s.length / 2
            iv = s.sub(mid - ANCHOR_RADIUS * R, mid + ANCHOR_RADIUS * R)
            if iv.size == 0:
                # no vertex within 5R of the midpoint: keep the nearest one
                p = s.param_array()
                iv = s.indices[[int(np.argmin(np.abs(p - mid)))]]
            ivs.append(iv)
        return cls(tuple(ivs), tuple(segments))


@dataclass(frozen=True)
class Skeleton:
    kind: str
    support: DiscreteSegment | Cycle
    covering_radius: float
    R: float
    D: float
    distortion: float | None = None
    audit: dict = field(default_factory=dict)
    far_point: object = None

    @property
    def ok(self) -> bool:
        return all(self.audit.values())

    def support_indices(self) -> np.ndarray:
        return self.support.indices

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "support": self.support.to_dict(),
            "covering_radius": self.covering_radius,
            "distortion": self.distortion,
            "R": self.R,
            "D": self.D,
            "audit": dict(self.audit),
            "far_point": self.far_point,
        }


def cycle_from_indices(space: FiniteGeodesicSpace, idx: Sequence[int]) -> Cycle:
    """Closed walk through ``idx`` (consecutive vertices adjacent, last joined to first)."""
    idx = np.asarray(idx, dtype=np.int64)
    closed = np.append(idx, idx[0])
    w = np.asarray(space.graph[closed[:-1], closed[1:]]).ravel()
    if len(idx) > 1 and np.any(w <= 0):
        raise ValueError("cycle vertices are not consecutive neighbours")
    params = np.concatenate([[0.0], np.cumsum(w)[:-1]])
    return Cycle(tuple(space.vertices[i] for i in idx.tolist()), tuple(params.tolist()),
                 float(w.sum()), idx)


def _check_evidence(evidence, R: float, D: float) -> None:
    if evidence is None:
        raise NotThinEvidence("a passing thinness report is required")
    if isinstance(evidence, ThinnessReport):
        evidence = evidence.to_dict()
    if evidence.get("verdict") != "pass":
        raise NotThinEvidence("thinness report did not pass")
    if not (math.isclose(evidence["R"], R) and math.isclose(evidence["D"], D)):
        raise NotThinEvidence(f"report is for R={evidence['R']}, D={evidence['D']}, "
                              f"not R={R}, D={D}")


def min_anchored_cycle(space: FiniteGeodesicSpace, anchors: AnchorTriple, D: float) -> Cycle:
    """Shortest loop through the ``D``-neighbourhoods of the three anchor intervals.

    Minimizes ``d(a,b) + d(b,c) + d(c,a)`` over the candidate triples and
    joins the three canonical shortest paths.  Ties go to the
    lexicographically smallest triple.
    """
    hoods = []
    for iv in anchors.intervals:
        if len(iv) == 0:
            raise EmptyAnchorNeighborhood("anchor interval has no vertices")
        h = np.flatnonzero(space.dist_to_set(iv) < D)
        if h.size == 0:
            raise EmptyAnchorNeighborhood("anchor neighbourhood is empty")
        hoods.append(h)
    for p in range(3):
        for q in range(p + 1, 3):
            if np.intersect1d(hoods[p], hoods[q]).size:
                raise AnchorsOverlap(f"anchor neighbourhoods {p} and {q} intersect")
    A, B, C = hoods
    dAB = space.rows(A)[:, B]
    dBC = space.rows(B)[:, C]
    dCA = space.rows(C)[:, A].T
    best = math.inf
    for k in range(A.size):
        tot = dAB[k][:, None] + dBC + dCA[k][None, :]
        m = float(tot.min())
        if m < best - space.eps:
            best = m
    # lexicographically first triple attaining the minimum
    for k in range(A.size):
        tot = dAB[k][:, None] + dBC + dCA[k][None, :]
        hit = np.argwhere(tot <= best + space.eps)
        if hit.size:
            a, b, c = int(A[k]), int(B[hit[0, 0]]), int(C[hit[0, 1]])
            break
    walk = (canonical_path_idx(space, a, b)[:-1] + canonical_path_idx(space, b, c)[:-1]
            + canonical_path_idx(space, c, a)[:-1])
    return cycle_from_indices(space, walk)


def circle_distortion(space: FiniteGeodesicSpace, cycle: Cycle) -> float:
    """``max |d(a,b) - arc(a,b)|`` over vertex pairs of the loop.

    All pairs when the loop has at most 2000 vertices; otherwise an evenly
    spaced subset of 2000 of them.
    """
    idx = cycle.indices
    s = cycle.param_array()
    if idx.size > MAX_DISTORTION_PAIRS_VERTICES:
        keep = np.linspace(0, idx.size - 1, MAX_DISTORTION_PAIRS_VERTICES).astype(np.int64)
        idx, s = idx[keep], s[keep]
    d = space.rows(idx)[:, idx]
    gap = np.abs(s[:, None] - s[None, :])
    arc = np.minimum(gap, cycle.length - gap)
    return float(np.abs(d - arc).max())


def extract_skeleton(space: FiniteGeodesicSpace, R: float, D: float, evidence=None, *,
                     mode: str = "auto", distortion_tol: float | None = None) -> Skeleton:
    """Segment or circle skeleton of a space certified (R, D)-thin by ``evidence``."""
    _check_evidence(evidence, R, D)
    l = maximal_segment(space, mode)
    d_l = space.dist_to_set(l.indices)
    cover = float(d_l.max())
    if cover <= COVER_FACTOR * R:
        return Skeleton("segment", l, cover, R, D,
                        audit={"covering_radius<=200R": True})
    if l.length < COVER_FACTOR * R:
        raise CircleBranchUnreachable(
            f"maximal segment has length {l.length} < 200R = {COVER_FACTOR * R} "
            f"but covering radius {cover} > 200R")
    p = int(np.argmax(d_l))
    gamma1 = segment_from_indices(space, canonical_path_idx(space, p, int(l.indices[-1])))
    gamma2 = segment_from_indices(space, canonical_path_idx(space, p, int(l.indices[0])))
    anchors = AnchorTriple.from_segments((gamma1, gamma2, l), R)
    cycle = min_anchored_cycle(space, anchors, D)
    if distortion_tol is None:
        distortion_tol = 2 * space.scale
    dist = circle_distortion(space, cycle)
    cov = covering_radius_idx(space, cycle.indices)
    audit = {
        "distortion<=tol": dist <= distortion_tol + space.eps,
        "covering_radius<=D+scale": cov <= D + space.scale + space.eps,
        "covering_radius<=200R": cov <= COVER_FACTOR * R,
        "length>=50R": cycle.length >= MIN_LOOP_FACTOR * R,
    }
    return Skeleton("circle", cycle, cov, R, D, distortion=dist, audit=audit,
                    far_point=space.vertices[p])


def skeleton_from_dict(space: FiniteGeodesicSpace, obj: dict) -> Skeleton:
    """Rebuild a skeleton serialized by :meth:`Skeleton.to_dict` on ``space``."""
    try:
        kind = obj["kind"]
        path = obj["support"]["path"]
        R, D = float(obj["R"]), float(obj["D"])
    except (KeyError, TypeError) as exc:
        raise SkeletonMismatch(f"not a skeleton document: missing {exc}") from None
    missing = [v for v in path if v not in space]
    if missing:
        raise SkeletonMismatch(f"skeleton vertex {missing[0]!r} is not in the graph")
    idx = [space.index(v) for v in path]
    try:
        if kind == "segment":
            support = segment_from_indices(space, idx)
        elif kind == "circle":
            support = cycle_from_indices(space, idx)
        else:
            raise SkeletonMismatch(f"unknown skeleton kind {kind!r}")
    except (ValueError, InputError) as exc:
        raise SkeletonMismatch(f"skeleton support is not a path of this graph: {exc}") from None
    return Skeleton(kind, support, float(obj.get("covering_radius", math.nan)), R, D,
                    distortion=obj.get("distortion"), audit=dict(obj.get("audit", {})),
                    far_point=obj.get("far_point"))

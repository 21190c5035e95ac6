"""(R, D)-thinness: certification, witnesses, profiles and the 3D-net trichotomy.

A space is (R, D)-thin when, for every segment ``r`` longer than ``2R``,
every point whose projection onto ``r`` lands at a parameter in
``(R, L(r) - R)`` lies strictly within ``D`` of ``r``.

Discretization choices:

* One canonical shortest path is checked per vertex pair, so a pass is a
  statement about canonical segments only, while a fail witness is always a
  genuine violation.
* Parameters are sampled on a grid of step ``t_step <= D/4`` and each grid
  point is represented by the nearest segment vertex strictly inside
  ``(R, L - R)``.  Along a segment, a skipped parameter is within ``D/4`` of a
  checked one, and by the triangle inequality its fiber members are within
  ``D/4`` of a checked fiber.
* Fibers are taken with slack ``tol`` (default ``min(edge scale, R/4)``):
  ``x`` is in the fiber of ``y`` when ``d(x, r) >= d(x, y) - tol``.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache, partial

import numpy as np

from .errors import BadParameters, BudgetExceeded, HypothesisNotMet
from .metric import (
    DiscreteSegment,
    FiniteGeodesicSpace,
    canonical_path_idx,
    double_sweep_idx,
    next_hops,
    project_idx,
    segment_from_indices,
)

DEFAULT_BUDGET = 256
LANDMARKS = 48


@dataclass(frozen=True)
class Witness:
    segment: DiscreteSegment
    t: float
    x: object
    dist_x_r: float

    def to_dict(self) -> dict:
        return {"segment": self.segment.to_dict(), "t": self.t, "x": self.x,
                "dist_x_r": self.dist_x_r}


@dataclass(frozen=True)
class ThinnessReport:
    R: float
    D: float
    verdict: str
    witness: Witness | None = None
    segments_checked: int = 0
    sampled: bool = False
    t_step: float = 0.0
    tol: float = 0.0

    def __post_init__(self):
        check_parameters(self.R, self.D)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self) -> dict:
        return {
            "R": self.R,
            "D": self.D,
            "verdict": self.verdict,
            "witness": None if self.witness is None else self.witness.to_dict(),
            "segments_checked": self.segments_checked,
            "sampled": self.sampled,
            "t_step": self.t_step,
            "tol": self.tol,
        }


def check_parameters(R: float, D: float) -> None:
    if not (D > 0 and R > 0):
        raise BadParameters(f"R and D must be positive, got R={R}, D={D}")
    if R < 20 * D:
        raise BadParameters(f"R >= 20 D is required, got R={R}, D={D}")


def interior_checkpoints(params: np.ndarray, R: float, t_step: float) -> np.ndarray:
    """Positions (into ``params``) of the vertices representing the grid ``R + k*t_step``.

    Each grid parameter in ``(R, L - R)`` maps to the nearest vertex whose own
    parameter is strictly inside that interval; ties go to the earlier vertex.
    """
    L = params[-1]
    inner = np.flatnonzero((params > R) & (params < L - R))
    if inner.size == 0:
        return inner
    n_grid = math.ceil((L - 2 * R) / t_step)
    p = params[inner]
    if p.size > 2 and t_step <= 0.5 * float(np.diff(p).min()):
        # every cell between two consecutive midpoints is at least 2*t_step
        # wide, so only the two end vertices can miss the grid
        k_last = n_grid
        while k_last > 0 and R + t_step * k_last >= L - R:
            k_last -= 1
        if k_last == 0:
            return inner[:0]
        keep = np.ones(p.size, dtype=bool)
        keep[0] = R + t_step <= (p[0] + p[1]) / 2
        keep[-1] = R + t_step * k_last > (p[-2] + p[-1]) / 2
        return inner[keep]
    ts = R + t_step * np.arange(1, n_grid + 1)
    ts = ts[ts < L - R]
    pos = np.clip(np.searchsorted(p, ts), 1, max(p.size - 1, 1))
    if p.size == 1:
        return inner
    left = p[pos - 1]
    right = p[pos]
    pick = np.where(ts - left <= right - ts, pos - 1, pos)
    return inner[np.unique(pick)]


def fiber_violation(space: FiniteGeodesicSpace, seg: DiscreteSegment, R: float, D: float,
                    t_step: float, tol: float) -> Witness | None:
    """Worst fiber member of ``seg`` at distance ``>= D``, or ``None``.

    The witness point is the one farthest from the segment (first in vertex
    order on ties); its parameter is the checked vertex closest to it.
    """
    params = seg.param_array()
    if params[-1] <= 2 * R:
        return None
    chk = interior_checkpoints(params, R, t_step)
    if chk.size == 0:
        return None
    chk_idx = seg.indices[chk]
    d_seg = space.dist_to_set(seg.indices)
    d_chk = space.dist_to_set(chk_idx)
    bad = (d_chk <= d_seg + tol + space.eps) & (d_seg >= D)
    if not bad.any():
        return None
    cand = np.flatnonzero(bad)
    x = int(cand[np.argmax(d_seg[cand])])
    to_x = space.row(x)[chk_idx]
    k = int(np.argmin(to_x))
    return Witness(seg, float(params[chk[k]]), space.vertices[x], float(d_seg[x]))


def _pairs_dense(space: FiniteGeodesicSpace, R: float, limit: int | None):
    dm = space.dist_matrix
    iu, ju = np.triu_indices(space.n, 1)
    dv = dm[iu, ju]
    keep = dv > 2 * R
    iu, ju, dv = iu[keep], ju[keep], dv[keep]
    total = iu.size
    if limit is not None and total > limit:
        part = np.argpartition(-dv, limit - 1)[:limit]
        # keep every pair tied with the cut-off distance so the order is well defined
        cut = dv[part].min()
        part = np.flatnonzero(dv >= cut)
        iu, ju, dv = iu[part], ju[part], dv[part]
    order = np.lexsort((ju, iu, -dv))
    return iu[order], ju[order], total


def _landmarks(space: FiniteGeodesicSpace, k: int) -> np.ndarray:
    a, _ = double_sweep_idx(space)
    chosen = [a]
    d = np.asarray(space.row(a), dtype=float).copy()
    while len(chosen) < min(k, space.n):
        nxt = int(np.argmax(d))
        if d[nxt] <= 0:
            break
        chosen.append(nxt)
        np.minimum(d, space.row(nxt), out=d)
    return np.asarray(sorted(chosen), dtype=np.int64)


def candidate_pairs(space: FiniteGeodesicSpace, R: float, budget: int | None, sample: bool):
    """Vertex pairs at distance ``> 2R`` in checking order and whether they were sampled.

    Order: decreasing distance, then lexicographic.  Large (lazy) spaces are
    sampled among farthest-point landmarks, since enumerating all pairs would
    need every distance row.
    """
    if space.dense:
        limit = budget if sample else None
        iu, ju, total = _pairs_dense(space, R, limit)
        if not sample and budget is not None and total > budget:
            raise BudgetExceeded(f"{total} segments exceed the budget of {budget}")
        sampled = iu.size < total
        if budget is not None and iu.size > budget:
            iu, ju, sampled = iu[:budget], ju[:budget], True
        return list(zip(iu.tolist(), ju.tolist())), sampled
    if not sample:
        raise BudgetExceeded("exhaustive checking of a lazily evaluated space is not supported; "
                             "enable sampling")
    budget = DEFAULT_BUDGET if budget is None else budget
    lm = _landmarks(space, max(LANDMARKS, math.ceil(math.sqrt(2 * budget)) + 1))
    rows = space.rows(lm)[:, lm]
    iu, ju = np.triu_indices(lm.size, 1)
    dv = rows[iu, ju]
    keep = dv > 2 * R
    iu, ju, dv = lm[iu[keep]], lm[ju[keep]], dv[keep]
    order = np.lexsort((ju, iu, -dv))[:budget]
    return list(zip(iu[order].tolist(), ju[order].tolist())), True


def thin_check(space: FiniteGeodesicSpace, R: float, D: float, *, t_step: float | None = None,
               tol: float | None = None, segment_budget: int | None = None,
               sample: bool = True, workers: int = 1) -> ThinnessReport:
    """Check the (R, D)-thin condition on canonical segments.

    With ``sample=False`` every pair at distance ``> 2R`` is checked and
    ``BudgetExceeded`` is raised if there are more than ``segment_budget``
    (``None`` means no limit).  With sampling the first ``segment_budget``
    pairs (default ``DEFAULT_BUDGET``) in checking order are used and the
    report is flagged ``sampled`` when pairs were skipped.
    """
    check_parameters(R, D)
    if t_step is None:
        t_step = D / 4
    if not 0 < t_step <= D / 4 * (1 + 1e-12):
        raise BadParameters(f"t_step must be in (0, D/4], got {t_step}")
    if tol is None:
        tol = min(space.scale, R / 4)
    if sample and segment_budget is None:
        segment_budget = DEFAULT_BUDGET
    pairs, sampled = candidate_pairs(space, R, segment_budget, sample)
    hops = lru_cache(maxsize=256)(partial(next_hops, space))

    def check(pair):
        i, j = pair
        seg = segment_from_indices(space, canonical_path_idx(space, i, j, hops(j)))
        return fiber_violation(space, seg, R, D, t_step, tol)

    checked = 0
    witness = None
    if workers <= 1:
        for pair in pairs:
            checked += 1
            witness = check(pair)
            if witness is not None:
                break
    else:
        chunk = 4 * workers
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for lo in range(0, len(pairs), chunk):
                for w in pool.map(check, pairs[lo:lo + chunk]):
                    checked += 1
                    if w is not None:
                        witness = w
                        break
                if witness is not None:
                    break
    return ThinnessReport(R, D, "fail" if witness else "pass", witness, checked, sampled,
                          t_step, tol)


def replay_witness(space: FiniteGeodesicSpace, report: ThinnessReport | dict) -> bool:
    """Re-verify a fail witness with the metric primitives only."""
    if isinstance(report, ThinnessReport):
        report = report.to_dict()
    w = report["witness"]
    if w is None:
        return False
    R, D, tol = report["R"], report["D"], report["tol"]
    path = [space.index(v) for v in w["segment"]["path"]]
    seg = segment_from_indices(space, path)
    if seg.geo_defect > space.eps * len(path):
        return False
    if not seg.length > 2 * R or not R < w["t"] < seg.length - R:
        return False
    params = seg.param_array()
    pos = np.flatnonzero(np.isclose(params, w["t"], rtol=0, atol=space.eps))
    if pos.size == 0:
        return False
    y = seg.indices[pos[0]]
    x = space.index(w["x"])
    d_seg = float(space.row(x)[seg.indices].min())
    in_fiber = space.d(x, int(y)) <= d_seg + tol + space.eps
    return bool(in_fiber and d_seg >= D and math.isclose(d_seg, w["dist_x_r"], abs_tol=space.eps))


@dataclass(frozen=True)
class ProfileEntry:
    R: float
    D_min: float
    report: ThinnessReport | None = field(default=None, repr=False)


@dataclass(frozen=True)
class ThinnessProfile:
    entries: tuple

    def to_dict(self) -> dict:
        return {"entries": [
            {"R": e.R, "D_min": None if math.isinf(e.D_min) else e.D_min,
             "certified": e.report is not None}
            for e in self.entries]}


def thinness_profile(space: FiniteGeodesicSpace, R_grid: Sequence[float],
                     D_grid: Sequence[float], **opts) -> ThinnessProfile:
    """Least passing ``D`` on ``D_grid`` for every ``R`` (``inf`` if none passes).

    Only grid values with ``R >= 20 D`` are tried.  Passing is monotone in
    ``D`` (the fibers do not depend on it), which justifies the bisection.
    """
    if any(v <= 0 for v in list(R_grid) + list(D_grid)):
        raise BadParameters("grids must be positive")
    if list(R_grid) != sorted(R_grid) or list(D_grid) != sorted(D_grid):
        raise BadParameters("grids must be sorted")
    entries = []
    for R in R_grid:
        Ds = [D for D in D_grid if R >= 20 * D]
        lo, hi = 0, len(Ds)
        best = None
        while lo < hi:
            mid = (lo + hi) // 2
            rep = thin_check(space, R, Ds[mid], **opts)
            if rep.passed:
                best, hi = rep, mid
            else:
                lo = mid + 1
        entries.append(ProfileEntry(R, best.D if best else math.inf, best))
    return ThinnessProfile(tuple(entries))


def net_trichotomy_check(space: FiniteGeodesicSpace, l: DiscreteSegment,
                         alpha: Sequence, R: float, D: float) -> str:
    """Which of ``[l(R), l(t)]`` / ``[l(t), l(L-R)]`` the projection of ``alpha`` 3D-nets.

    ``alpha`` is an edge path whose start projects to some ``l(t)`` with
    ``t`` in ``(R, L-R)`` and whose end projects to some ``l(u)`` with ``u`` in
    ``[0, R]`` or ``[L-R, L]``.  Returns ``"case_A"`` (preferred when both
    hold), ``"case_B"`` or ``"violation"``.
    """
    check_parameters(R, D)
    L = l.length
    if not L > 2 * R:
        raise HypothesisNotMet(f"segment length {L} is not greater than 2R = {2 * R}")
    a_idx = [space.index(v) for v in alpha]
    for p, q in zip(a_idx[:-1], a_idx[1:]):
        if p != q and q not in set(space.neighbors(p)[0].tolist()):
            raise HypothesisNotMet("alpha is not an edge path")
    params = l.param_array()
    pos_of = {int(v): k for k, v in enumerate(l.indices)}

    def proj_params(x):
        return params[[pos_of[int(y)] for y in project_idx(space, l.indices, x)]]

    start = proj_params(a_idx[0])
    inner = start[(start > R) & (start < L - R)]
    if inner.size == 0:
        raise HypothesisNotMet("alpha(0) does not project into (R, L-R)")
    t = float(inner.min())
    end = proj_params(a_idx[-1])
    if not np.any((end <= R) | (end >= L - R)):
        raise HypothesisNotMet("the end of alpha does not project into [0,R] or [L-R,L]")

    hit = set()
    for x in dict.fromkeys(a_idx):
        hit.update(project_idx(space, l.indices, x).tolist())
    S = np.asarray(sorted(hit), dtype=np.int64)
    d_S = space.dist_to_set(S)
    tol = 3 * D + space.eps

    def nets(lo, hi):
        part = l.indices[(params >= lo) & (params <= hi)]
        return bool(np.all(d_S[part] <= tol))

    if nets(R, t):
        return "case_A"
    if nets(t, L - R):
        return "case_B"
    return "violation"

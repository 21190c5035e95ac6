"""Scale-picking Vitali cover of the cells where a field has large scaled averages.

Cells ``y`` of a discretized region carry a non-negative field value and a
volume.  ``y`` is *bad* when ``r^(2s) * avg_{B_r(y)} field > eta`` for some
grid radius ``r``; ``r_y`` is then the largest grid radius with
``r_y^(2s) * avg >= eta``.  Greedy selection by decreasing ``r_y`` keeps a
family with pairwise disjoint ``B_{r_y}`` (as cell sets) whose dilates
``B_{5 r_y}`` cover every bad cell, and::

    sum Vol(B_{5 r_y}) (5 r_y)^(-2s)  <=  (c / eta) * integral of field

with ``c = 5^(-2s) * max Vol(B_{5r}(y)) / Vol(B_r(y))`` over cells and grid
radii (the doubling constant of the grid).  Balls are open, ``|x - y| < r``,
and clipped to the region.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import BadExponent, BadParameters


@dataclass(frozen=True)
class ScalePickCover:
    balls: tuple
    s: float
    eta: float
    weighted_sum: float
    grid_constant: float
    total_integral: float
    bad_cells: int

    @property
    def bound(self) -> float:
        return self.grid_constant / self.eta * self.total_integral

    @property
    def bound_holds(self) -> bool:
        return self.weighted_sum <= self.bound * (1 + 1e-12)

    def to_dict(self) -> dict:
        return {"balls": [list(b) for b in self.balls], "s": self.s, "eta": self.eta,
                "weighted_sum": self.weighted_sum, "grid_constant": self.grid_constant,
                "total_integral": self.total_integral, "bound": self.bound,
                "bound_holds": self.bound_holds, "bad_cells": self.bad_cells}


def _as_points(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x[:, None] if x.ndim == 1 else x


def scale_pick_cover(points, field, volumes, s: float, eta: float, radii) -> ScalePickCover:
    """Select the scale-picked Vitali family on a cell grid.

    ``points``: cell centres, shape ``(N,)`` or ``(N, dim)``.  ``radii``: the
    increasing grid of admissible radii between ``r_min`` and ``r_max``.
    Each ball is ``(center_index, center, 5 r_y, r_y)``.
    """
    if not 0 < s < 1:
        raise BadExponent(f"s must lie in (0, 1), got {s}")
    if not eta > 0:
        raise BadParameters(f"eta must be positive, got {eta}")
    radii = np.asarray(radii, dtype=float)
    if radii.ndim != 1 or radii.size == 0 or np.any(radii <= 0) or np.any(np.diff(radii) <= 0):
        raise BadParameters("radii must be positive and strictly increasing")
    X = _as_points(points)
    f = np.asarray(field, dtype=float)
    w = np.asarray(volumes, dtype=float)
    if np.any(f < 0) or np.any(w <= 0):
        raise BadParameters("field must be non-negative and volumes positive")
    dist = np.linalg.norm(X[:, None, :] - X[None, :, :], axis=2)
    total = float(np.sum(f * w))

    # vol[y, i] and mass[y, i] for the ball B_{radii[i]}(y)
    inside = dist[:, :, None] < radii[None, None, :]
    vol = np.einsum("yxi,x->yi", inside, w)
    mass = np.einsum("yxi,x->yi", inside, f * w)
    score = radii[None, :] ** (2 * s) * mass / vol
    inside5 = dist[:, :, None] < 5 * radii[None, None, :]
    vol5 = np.einsum("yxi,x->yi", inside5, w)
    c = float(5.0 ** (-2 * s) * np.max(vol5 / vol))

    bad = np.flatnonzero(np.max(score, axis=1) > eta)
    ry_idx = {}
    for y in bad.tolist():
        ok = np.flatnonzero(score[y] >= eta)
        ry_idx[y] = int(ok[-1])
    order = sorted(ry_idx, key=lambda y: (-radii[ry_idx[y]], -f[y], y))
    taken = np.zeros(len(f), dtype=bool)
    chosen = []
    for y in order:
        cells = dist[y] < radii[ry_idx[y]]
        if taken[cells].any():
            continue
        taken |= cells
        chosen.append(y)
    balls = []
    wsum = 0.0
    for y in chosen:
        i = ry_idx[y]
        r = float(radii[i])
        center = X[y].tolist() if X.shape[1] > 1 else float(X[y, 0])
        balls.append((int(y), center, 5 * r, r))
        wsum += float(vol5[y, i]) * (5 * r) ** (-2 * s)
    return ScalePickCover(tuple(balls), s, eta, wsum, c, total, int(bad.size))


def fifth_balls_disjoint(points, cover: ScalePickCover) -> bool:
    """Exact check that the selected ``B_{r_y}`` share no cell."""
    X = _as_points(points)
    seen = np.zeros(X.shape[0], dtype=bool)
    for y, _, _, r in cover.balls:
        cells = np.linalg.norm(X - X[y], axis=1) < r
        if seen[cells].any():
            return False
        seen |= cells
    return True


def covers_bad_cells(points, field, volumes, cover: ScalePickCover, radii) -> bool:
    """Every bad cell lies in some selected ``B_{5 r_y}``."""
    X = _as_points(points)
    f = np.asarray(field, dtype=float)
    w = np.asarray(volumes, dtype=float)
    radii = np.asarray(radii, dtype=float)
    dist = np.linalg.norm(X[:, None, :] - X[None, :, :], axis=2)
    inside = dist[:, :, None] < radii[None, None, :]
    score = (radii[None, :] ** (2 * cover.s) * np.einsum("yxi,x->yi", inside, f * w)
             / np.einsum("yxi,x->yi", inside, w))
    bad = np.flatnonzero(np.max(score, axis=1) > cover.eta)
    covered = np.zeros(X.shape[0], dtype=bool)
    for y, _, R5, _ in cover.balls:
        covered |= np.linalg.norm(X - X[y], axis=1) < R5
    return bool(covered[bad].all())

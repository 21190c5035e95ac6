"""Ball-growth counts and a linear fit, the discrete stand-in for linear volume growth."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .errors import BadParameters
from .metric import FiniteGeodesicSpace

SUPERLINEAR_RESIDUAL = 0.25


@dataclass(frozen=True)
class VolumeGrowth:
    base: object
    t: tuple
    counts: tuple
    slope: float
    intercept: float
    max_residual: float
    relative_residual: float
    verdict: str

    def to_dict(self) -> dict:
        return {"base": self.base, "t": list(self.t), "counts": list(self.counts),
                "slope": self.slope, "intercept": self.intercept,
                "max_residual": self.max_residual, "relative_residual": self.relative_residual,
                "verdict": self.verdict}


def volume_growth(space: FiniteGeodesicSpace, base, t_grid: Sequence[float],
                  threshold: float = SUPERLINEAR_RESIDUAL) -> VolumeGrowth:
    """``|B_t(base)|`` (closed balls, ``d <= t``) and a least-squares line.

    ``relative_residual`` is the largest absolute residual divided by the
    mean count.  Above ``threshold`` the growth is called ``superlinear`` or
    ``sublinear`` by the sign of a quadratic fit's leading term, otherwise
    ``linear``.
    """
    t = np.asarray(t_grid, dtype=float)
    if t.size < 2 or np.any(np.diff(t) <= 0):
        raise BadParameters("t_grid must be strictly increasing with at least two points")
    i = space.index(base)
    d = np.sort(np.asarray(space.row(i)))
    counts = np.searchsorted(d, t + space.eps, side="right")
    slope, intercept = np.polyfit(t, counts, 1)
    res = counts - (slope * t + intercept)
    max_res = float(np.abs(res).max())
    rel = max_res / float(counts.mean())
    verdict = "linear"
    if rel > threshold:
        quad = np.polyfit(t, counts, 2)[0] if t.size >= 3 else 0.0
        verdict = "superlinear" if quad > 0 else "sublinear"
    return VolumeGrowth(base, tuple(t.tolist()), tuple(int(c) for c in counts),
                        float(slope), float(intercept), max_res, rel, verdict)

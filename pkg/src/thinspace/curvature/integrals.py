"""Ball averages of curvature functionals and the tangent-cone hypothesis scan."""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from ..errors import BadParameters, InputError, UnsupportedBase
from .manifolds import (
    AnalyticManifold,
    RadialPiece,
    paraboloid_area,
    r_k,
    radial_pieces,
)
from .quadrature import adaptive_simpson

QUAD_TOL = 1e-8
MC_SAMPLES = 1 << 14
MC_STRATA = 64
KINK_SCAN = 129


@dataclass(frozen=True)
class Integrand:
    """Scalar field built from ``R_k``.

    ``clamp``: ``0 v (g * R_k) ^ L``.  ``power``: ``|R_k|^s``.  ``k=None``
    means ``k = n`` (scalar curvature).
    """

    kind: str
    k: int | None = None
    g: float = 1.0
    L: float = math.inf
    s: float = 1.0

    def __post_init__(self):
        if self.kind not in ("clamp", "power"):
            raise InputError(f"unknown integrand kind {self.kind!r}")

    @classmethod
    def clamp(cls, k: int | None, g: float = 1.0, L: float = math.inf) -> Integrand:
        return cls("clamp", k, g=g, L=L)

    @classmethod
    def power(cls, k: int | None = None, s: float = 1.0) -> Integrand:
        return cls("power", k, s=s)

    def resolve_k(self, m: AnalyticManifold) -> int:
        return m.n if self.k is None else self.k

    def apply(self, rk):
        rk = np.asarray(rk, dtype=float)
        if self.kind == "clamp":
            return np.clip(self.g * rk, 0.0, self.L)
        return np.abs(rk) ** self.s

    def levels(self) -> tuple:
        """Values of ``R_k`` where the field has a kink."""
        if self.kind == "clamp" and self.g != 0:
            out = [0.0]
            if math.isfinite(self.L):
                out.append(self.L / self.g)
            return tuple(out)
        return (0.0,) if self.s < 1 else ()


@dataclass(frozen=True)
class IntegralEstimate:
    value: float
    abs_error_bound: float
    method: str
    nodes: int

    def to_dict(self) -> dict:
        return {"value": self.value, "abs_error_bound": self.abs_error_bound,
                "method": self.method, "nodes": self.nodes}


def _on_axis(m: AnalyticManifold, base) -> bool:
    if base is None or isinstance(base, str):
        return True
    if m.homogeneous:
        return True
    u = np.asarray(base, dtype=float).ravel()
    return bool(np.all(u == 0.0))


def _kinks(piece: RadialPiece, k: int, levels: Sequence[float]) -> list[float]:
    if not levels or piece.u1 <= piece.u0:
        return []
    us = np.linspace(piece.u0, piece.u1, KINK_SCAN)
    vals = piece.rk(us, k)
    out = []
    for lev in levels:
        h = vals - lev
        for i in np.flatnonzero(np.sign(h[:-1]) * np.sign(h[1:]) < 0):
            out.append(brentq(lambda u: float(piece.rk(np.asarray([u]), k)[0]) - lev,
                              us[i], us[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps))
    return sorted(out)


def _volume(m: AnalyticManifold, pieces) -> tuple[float, float]:
    if m.family == "paraboloid":
        return paraboloid_area(pieces[0].u1) / (2 * math.pi), 0.0
    v = e = 0.0
    for p in pieces:
        q = adaptive_simpson(p.density, p.u0, p.u1, 1e-13 * max(1.0, p.u1))
        v += q.value
        e += q.error
    return v, e


def _quadrature(m, r, integrand, k, tol) -> IntegralEstimate:
    pieces = radial_pieces(m, r)
    vol, vol_err = _volume(m, pieces)
    levels = integrand.levels()
    num = num_err = 0.0
    nodes = 0
    span = sum(p.u1 - p.u0 for p in pieces)
    for p in pieces:
        cuts = [p.u0, *_kinks(p, k, levels), p.u1]
        for a, b in zip(cuts[:-1], cuts[1:]):
            if b <= a:
                continue
            q = adaptive_simpson(lambda u, p=p: integrand.apply(p.rk(u, k)) * p.density(u),
                                 a, b, tol * vol * (b - a) / span)
            num += q.value
            num_err += q.error
            nodes += q.nodes
    value = num / vol
    if integrand.kind == "clamp":
        # an average of a field in [0, L] stays there; rounding can overshoot
        value = min(max(value, 0.0), integrand.L)
    err = num_err / vol + abs(num) * vol_err / vol**2
    return IntegralEstimate(float(value), float(err), "quadrature", nodes)


def _mc_radial(m, r, integrand, k, samples, rng) -> IntegralEstimate:
    pieces = radial_pieces(m, r)
    vol, _ = _volume(m, pieces)
    span = sum(p.u1 - p.u0 for p in pieces)
    num = var = 0.0
    used = 0
    for p in pieces:
        width = p.u1 - p.u0
        if width <= 0:
            continue
        strata = max(1, round(MC_STRATA * width / span))
        per = max(2, samples // (MC_STRATA))
        edges = np.linspace(p.u0, p.u1, strata + 1)
        for a, b in zip(edges[:-1], edges[1:]):
            u = rng.uniform(a, b, per)
            y = integrand.apply(p.rk(u, k)) * p.density(u) * (b - a)
            num += y.mean()
            var += y.var(ddof=1) / per
            used += per
    return IntegralEstimate(float(num / vol), float(3 * math.sqrt(var) / vol), "monte_carlo", used)


def _sample_ball(m: AnalyticManifold, base, r: float, samples: int, rng) -> np.ndarray:
    """Accepted chart points of ``B_r(base)`` by rejection; returns radial chart coordinates."""
    fam = m.family
    out = []
    got = 0
    while got < samples:
        batch = 4 * (samples - got) + 64
        if fam == "flat":
            n = m.params[0]
            b = np.zeros(n) if base is None else np.resize(np.asarray(base, dtype=float), n)
            x = b + rng.uniform(-r, r, (batch, n))
            keep = np.linalg.norm(x - b, axis=1) < r
            pts = np.linalg.norm(x[keep], axis=1)
        elif fam == "sphere":
            n, rho = m.params
            th0 = 0.0 if base is None else float(np.asarray(base, dtype=float).ravel()[0])
            b = np.zeros(n + 1)
            b[0], b[1] = math.cos(th0), math.sin(th0)
            x = rng.standard_normal((batch, n + 1))
            x /= np.linalg.norm(x, axis=1, keepdims=True)
            keep = rho * np.arccos(np.clip(x @ b, -1, 1)) < r
            pts = np.arccos(np.clip(x[keep, 0], -1, 1))
        elif fam == "product_sphere_flat":
            rho, d = m.params
            bb = np.zeros(1 + d) if base is None else np.resize(np.asarray(base, dtype=float), 1 + d)
            sb = np.array([math.cos(bb[0]), math.sin(bb[0]), 0.0])
            x = rng.standard_normal((batch, 3))
            x /= np.linalg.norm(x, axis=1, keepdims=True)
            y = bb[1:] + rng.uniform(-r, r, (batch, d))
            a = rho * np.arccos(np.clip(x @ sb, -1, 1))
            keep = a * a + np.sum((y - bb[1:]) ** 2, axis=1) < r * r
            pts = np.arccos(np.clip(x[keep, 0], -1, 1))
        else:
            raise UnsupportedBase(f"no closed-form distance on {fam} away from the symmetry point")
        out.append(pts)
        got += pts.size
    return np.concatenate(out)[:samples]


def ball_integral(m: AnalyticManifold, base, r: float, integrand: Integrand,
                  method: str = "quadrature", *, seed=None,
                  samples: int = MC_SAMPLES, tol: float = QUAD_TOL) -> IntegralEstimate:
    """Average of ``integrand`` over the geodesic ball ``B_r(base)``.

    ``base=None`` (or a name like ``"apex"``) is the symmetry point.
    Quadrature integrates the radial profile and needs a symmetric base; on
    homogeneous families the field is constant and returned exactly.
    Monte Carlo reports a 3-sigma bound, so it holds with high probability
    only, and needs an explicit ``seed``.
    """
    if not r > 0:
        raise BadParameters(f"radius must be positive, got {r}")
    k = integrand.resolve_k(m)
    r_k(m, None, k)  # validates k
    axis = _on_axis(m, base)
    if method == "quadrature":
        if not axis:
            raise UnsupportedBase("quadrature needs the symmetry point as base")
        if m.homogeneous:
            val = float(integrand.apply(r_k(m, None, k)))
            return IntegralEstimate(val, 0.0, "quadrature", 1)
        return _quadrature(m, r, integrand, k, tol)
    if method != "monte_carlo":
        raise InputError(f"unknown method {method!r}")
    if seed is None:
        raise InputError("Monte Carlo needs an explicit seed")
    rng = np.random.default_rng(seed)
    if axis and not m.homogeneous:
        return _mc_radial(m, r, integrand, k, samples, rng)
    pts = _sample_ball(m, None if axis else base, r, samples, rng)
    vals = integrand.apply(np.array([r_k(m, float(u), k) for u in np.unique(pts)]))
    field = vals[np.searchsorted(np.unique(pts), pts)]
    err = 3 * field.std(ddof=1) / math.sqrt(field.size) if field.size > 1 else 0.0
    return IntegralEstimate(float(field.mean()), float(err), "monte_carlo", int(field.size))


@dataclass(frozen=True)
class HypothesisScan:
    rows: tuple
    trend: str
    alpha: float
    k: int
    L: float

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "k": self.k, "L": self.L, "trend": self.trend,
                "rows": [list(r) for r in self.rows]}


def scan_trend(values: Sequence[float], errors: Sequence[float], L: float) -> str:
    """Classify the last third of a scan.

    ``approaching 0``: non-increasing (up to the error bars) and ending below
    ``L/10``.  ``approaching L``: non-decreasing and ending above ``0.9 L``.
    Otherwise ``inconclusive``.
    """
    v = np.asarray(values, dtype=float)
    e = np.asarray(errors, dtype=float)
    tail = max(2, math.ceil(v.size / 3))
    v, e = v[-tail:], e[-tail:]
    if v.size < 2:
        return "inconclusive"
    slack = e[:-1] + e[1:] + 1e-12
    down = bool(np.all(np.diff(v) <= slack))
    up = bool(np.all(np.diff(v) >= -slack))
    if down and v[-1] <= L / 10:
        return "approaching 0"
    if up and v[-1] >= 0.9 * L:
        return "approaching L"
    return "inconclusive"


def tangent_hypothesis_scan(m: AnalyticManifold, base, k: int, alpha: float, L: float,
                            r_grid: Sequence[float], method: str = "quadrature",
                            seed: int | None = None) -> HypothesisScan:
    """``F(r)``, the ball average of ``0 v (r^(2-alpha) R_k) ^ L``, along ``r_grid``."""
    if not 0 < alpha < 2:
        raise BadParameters(f"alpha must lie in (0, 2), got {alpha}")
    r_grid = [float(r) for r in r_grid]
    if not r_grid or any(b <= a for a, b in zip(r_grid, r_grid[1:])):
        raise BadParameters("r_grid must be strictly increasing and non-empty")
    streams = (np.random.SeedSequence(seed).spawn(len(r_grid)) if seed is not None
               else [None] * len(r_grid))
    rows = []
    for r, stream in zip(r_grid, streams):
        est = ball_integral(m, base, r, Integrand.clamp(k, r ** (2 - alpha), L), method,
                            seed=stream)
        rows.append((r, est.value, est.abs_error_bound))
    trend = scan_trend([x[1] for x in rows], [x[2] for x in rows], L)
    return HypothesisScan(tuple(rows), trend, alpha, k, L)

"""Closed-form Riemannian families with their Ricci eigenvalues and radial structure.

Points are chart coordinates.  Rotationally symmetric families also accept
a single float, the radial chart coordinate around the symmetry point:

* ``sphere(n, rho)``: polar angle ``theta`` in ``[0, pi]`` from the pole.
* ``paraboloid``: ``z = x^2 + y^2``; a point is ``(x, y)`` or ``rho = |(x, y)|``.
* ``product_sphere_flat(rho, d)``: ``S^2(rho) x R^d``; any point.
* ``flat(n)``: ``R^n``; any point.
* ``capped_cylinder(rho, h)``: a cylinder of radius ``rho`` and height ``h``
  closed by two hemispheres; a point is the geodesic distance ``s`` from the
  bottom pole, ``0 <= s <= pi*rho + h``.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from ..errors import BadK, InputError, OutOfChart

FAMILIES = ("sphere", "paraboloid", "product_sphere_flat", "flat", "capped_cylinder")


@dataclass(frozen=True)
class AnalyticManifold:
    family: str
    params: tuple = ()

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InputError(f"unknown family {self.family!r}")

    @property
    def n(self) -> int:
        if self.family == "sphere":
            return int(self.params[0])
        if self.family == "product_sphere_flat":
            return 2 + int(self.params[1])
        if self.family == "flat":
            return int(self.params[0])
        return 2

    @property
    def homogeneous(self) -> bool:
        """Isometry group acts transitively, so every point is a symmetry point."""
        return self.family in ("sphere", "product_sphere_flat", "flat")

    def describe(self) -> dict:
        return {"family": self.family, "params": list(self.params), "n": self.n}


def sphere(n: int = 2, rho: float = 1.0) -> AnalyticManifold:
    if n < 2 or rho <= 0:
        raise InputError("sphere needs n >= 2 and rho > 0")
    return AnalyticManifold("sphere", (int(n), float(rho)))


def paraboloid() -> AnalyticManifold:
    return AnalyticManifold("paraboloid", ())


def product_sphere_flat(rho: float = 1.0, d: int = 1) -> AnalyticManifold:
    if rho <= 0 or d < 0:
        raise InputError("product_sphere_flat needs rho > 0 and d >= 0")
    return AnalyticManifold("product_sphere_flat", (float(rho), int(d)))


def flat(n: int = 2) -> AnalyticManifold:
    if n < 1:
        raise InputError("flat needs n >= 1")
    return AnalyticManifold("flat", (int(n),))


def capped_cylinder(rho: float = 1.0, h: float = 1.0) -> AnalyticManifold:
    if rho <= 0 or h < 0:
        raise InputError("capped_cylinder needs rho > 0 and h >= 0")
    return AnalyticManifold("capped_cylinder", (float(rho), float(h)))


def from_name(name: str, **kw) -> AnalyticManifold:
    makers = {"sphere": sphere, "paraboloid": paraboloid,
              "product_sphere_flat": product_sphere_flat, "flat": flat,
              "capped_cylinder": capped_cylinder}
    try:
        return makers[name](**kw)
    except KeyError:
        raise InputError(f"unknown family {name!r}") from None


# -- paraboloid helpers -------------------------------------------------------

def paraboloid_K(rho):
    """Gaussian curvature of ``z = x^2 + y^2`` at chart radius ``rho``."""
    return 4.0 / (1.0 + 4.0 * np.square(rho)) ** 2


def paraboloid_arclength(rho):
    """Geodesic distance from the apex: meridian arclength of ``sqrt(1 + 4 rho^2)``."""
    rho = np.asarray(rho, dtype=float)
    q = np.sqrt(1.0 + 4.0 * rho * rho)
    return rho * q / 2.0 + np.arcsinh(2.0 * rho) / 4.0


def paraboloid_rho_at(s: float) -> float:
    """Inverse of :func:`paraboloid_arclength`."""
    if s <= 0:
        return 0.0
    hi = max(1.0, math.sqrt(s))
    while paraboloid_arclength(hi) < s:
        hi *= 2
    return brentq(lambda r: float(paraboloid_arclength(r)) - s, 0.0, hi, xtol=1e-14, rtol=1e-15)


def paraboloid_area(rho) -> float:
    """Area of ``{|(x, y)| < rho}``."""
    return 2 * math.pi * ((1.0 + 4.0 * rho * rho) ** 1.5 - 1.0) / 12.0


# -- points and eigenvalues ----------------------------------------------------

def _radial(m: AnalyticManifold, point) -> float:
    if point is None:
        return 0.0
    if isinstance(point, (int, float, np.integer, np.floating)):
        return float(point)
    p = np.asarray(point, dtype=float).ravel()
    if m.family == "paraboloid":
        if p.size != 2:
            raise OutOfChart("paraboloid points are (x, y)")
        return float(math.hypot(p[0], p[1]))
    return float(p[0]) if p.size else 0.0


def _check_chart(m: AnalyticManifold, point) -> float:
    u = _radial(m, point)
    if not math.isfinite(u):
        raise OutOfChart(f"{point!r} is not a finite chart point")
    if m.family == "sphere" and not 0.0 <= u <= math.pi:
        raise OutOfChart(f"polar angle {u} outside [0, pi]")
    if m.family == "paraboloid" and u < 0:
        raise OutOfChart(f"chart radius {u} is negative")
    if m.family == "capped_cylinder":
        rho, h = m.params
        if not 0.0 <= u <= math.pi * rho + h:
            raise OutOfChart(f"s={u} outside [0, {math.pi * rho + h}]")
    return u


def ricci_eigenvalues(m: AnalyticManifold, point=None) -> np.ndarray:
    """Eigenvalues of the Ricci tensor at ``point``, ascending."""
    u = _check_chart(m, point)
    n = m.n
    if m.family == "sphere":
        return np.full(n, (n - 1) / m.params[1] ** 2)
    if m.family == "flat":
        return np.zeros(n)
    if m.family == "product_sphere_flat":
        rho, d = m.params
        return np.concatenate([np.zeros(d), np.full(2, 1.0 / rho**2)])
    if m.family == "paraboloid":
        return np.full(2, float(paraboloid_K(u)))
    rho, h = m.params
    # the weld circles carry the cylinder value
    on_cap = u < math.pi * rho / 2 or u > math.pi * rho / 2 + h
    return np.full(2, 1.0 / rho**2 if on_cap else 0.0)


def r_k(m: AnalyticManifold, point, k: int) -> float:
    """Sum of the ``k`` smallest Ricci eigenvalues."""
    if not 1 <= k <= m.n:
        raise BadK(f"k={k} outside 1..{m.n}")
    return float(ricci_eigenvalues(m, point)[:k].sum())


# -- radial structure around a symmetry point --------------------------------------

@dataclass(frozen=True)
class RadialPiece:
    """One smooth stretch ``[u0, u1]`` of the radial variable.

    ``density(u)`` is the volume element ``dVol/du`` up to a constant common
    to all pieces, and ``rk(u, k)`` the eigensum at radial position ``u``.
    """

    u0: float
    u1: float
    density: Callable
    rk: Callable


def _const_rk(m: AnalyticManifold) -> Callable:
    lam = ricci_eigenvalues(m, 0.0)
    return lambda u, k: np.full(np.shape(u), lam[:k].sum())


def radial_pieces(m: AnalyticManifold, r: float) -> list[RadialPiece]:
    """Pieces covering the geodesic ball ``B_r`` around the symmetry point."""
    fam = m.family
    if fam == "sphere":
        n, rho = m.params
        s1 = min(r, math.pi * rho)
        return [RadialPiece(0.0, s1, lambda s: np.sin(np.asarray(s) / rho) ** (n - 1),
                            _const_rk(m))]
    if fam == "flat":
        n = m.params[0]
        return [RadialPiece(0.0, r, lambda s: np.asarray(s, dtype=float) ** (n - 1), _const_rk(m))]
    if fam == "product_sphere_flat":
        raise InputError("product balls are not radial in one variable; use ball_volume")
    if fam == "paraboloid":
        u1 = paraboloid_rho_at(r)
        return [RadialPiece(0.0, u1, lambda u: np.asarray(u) * np.sqrt(1 + 4 * np.square(u)),
                            lambda u, k: k * paraboloid_K(u))]
    rho, h = m.params
    a, b, total = math.pi * rho / 2, math.pi * rho / 2 + h, math.pi * rho + h
    cap = 1.0 / rho**2
    pieces = []
    spans = [(0.0, a, lambda s: np.sin(np.asarray(s) / rho), cap),
             (a, b, lambda s: np.ones(np.shape(s)), 0.0),
             (b, total, lambda s: np.cos((np.asarray(s) - b) / rho), cap)]
    for u0, u1, dens, kval in spans:
        if u0 >= r or u1 <= u0:
            continue
        pieces.append(RadialPiece(u0, min(u1, r), dens,
                                  lambda u, k, kval=kval: np.full(np.shape(u), k * kval)))
    return pieces


def ball_volume(m: AnalyticManifold, r: float) -> float:
    """Volume of the geodesic ball of radius ``r`` about a symmetry point."""
    from .quadrature import adaptive_simpson
    if m.family == "product_sphere_flat":
        rho, d = m.params
        # slice by the sphere distance a: 2 pi rho sin(a/rho) da times a d-ball
        omega = math.pi ** (d / 2) / math.gamma(d / 2 + 1)
        amax = min(r, math.pi * rho)

        def slice_vol(a):
            a = np.asarray(a, dtype=float)
            return (2 * math.pi * rho * np.sin(a / rho) * omega
                    * np.maximum(r * r - a * a, 0.0) ** (d / 2))
        return adaptive_simpson(slice_vol, 0.0, amax, 1e-12 * max(1.0, r) ** (d + 2)).value
    return sum(adaptive_simpson(p.density, p.u0, p.u1, 1e-12).value * _density_constant(m)
               for p in radial_pieces(m, r) if p.u1 > p.u0)


def _density_constant(m: AnalyticManifold) -> float:
    if m.family == "sphere":
        n, rho = m.params
        return 2 * math.pi ** (n / 2) / math.gamma(n / 2) * rho ** (n - 1)
    if m.family == "flat":
        n = m.params[0]
        return 2 * math.pi ** (n / 2) / math.gamma(n / 2)
    if m.family == "capped_cylinder":
        return 2 * math.pi * m.params[0]
    return 2 * math.pi

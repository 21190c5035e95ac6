"""Edge lists for the graph families used throughout the tests and examples.

Vertex ids are integers (or integer tuples flattened to integers) so the
canonical order is numeric.
"""

from __future__ import annotations

import numpy as np

from .metric import FiniteGeodesicSpace, build_space


def path_edges(n: int, length: float = 1.0, offset: int = 0) -> list:
    return [(offset + i, offset + i + 1, length) for i in range(n - 1)]


def path_graph(n: int, length: float = 1.0) -> FiniteGeodesicSpace:
    return build_space(path_edges(n, length))


def cycle_graph(n: int, length: float = 1.0) -> FiniteGeodesicSpace:
    return build_space(path_edges(n, length) + [(n - 1, 0, length)])


def tripod(legs=(100, 100, 100), length: float = 1.0) -> FiniteGeodesicSpace:
    """Three paths glued at vertex 0; leg ``k`` has vertices ``k*10**6 + 1..``."""
    edges = []
    for k, m in enumerate(legs):
        prev = 0
        for s in range(1, m + 1):
            v = (k + 1) * 10**6 + s
            edges.append((prev, v, length))
            prev = v
    return build_space(edges)


def tripod_tip(leg: int, legs=(100, 100, 100)) -> int:
    return (leg + 1) * 10**6 + legs[leg]


def grid_graph(rows: int, cols: int, length: float = 1.0) -> FiniteGeodesicSpace:
    """``rows x cols`` grid; vertex ``r * cols + c``."""
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1, length))
            if r + 1 < rows:
                edges.append((v, v + cols, length))
    return build_space(edges)


def tube_edges(m: int, n: int, ring_length: float = 1.0, axial_length: float = 1.0,
               closed: bool = False) -> list:
    """Cartesian product ``C_m x P_n`` (or ``C_m x C_n`` when ``closed``).

    Vertex ``a * m + r`` sits at axial position ``a`` and ring position ``r``.
    """
    edges = []
    for a in range(n):
        for r in range(m):
            v = a * m + r
            if m > 1 and (m > 2 or r == 0):
                edges.append((v, a * m + (r + 1) % m, ring_length))
            if a + 1 < n:
                edges.append((v, v + m, axial_length))
            elif closed:
                edges.append((v, r, axial_length))
    return edges


def cylinder(m: int, n: int, ring_length: float = 1.0, axial_length: float = 1.0,
             **kw) -> FiniteGeodesicSpace:
    return build_space(tube_edges(m, n, ring_length, axial_length), **kw)


def torus_tube(m: int, n: int, ring_length: float = 1.0, axial_length: float = 1.0,
               **kw) -> FiniteGeodesicSpace:
    return build_space(tube_edges(m, n, ring_length, axial_length, closed=True), **kw)


def noisy_tube(m: int, n: int, ring_length: float, closed: bool, rng: np.random.Generator,
               n_noise: int = 20, **kw) -> FiniteGeodesicSpace:
    """Tube with extra in-ring chords spanning 2 to ``m // 4`` ring steps.

    Chord lengths are drawn between half and all of the ring distance they
    span, so they perturb the metric only inside a ring.
    """
    edges = tube_edges(m, n, ring_length, 1.0, closed)
    span = m // 4
    for _ in range(n_noise if span >= 2 else 0):
        a = int(rng.integers(n))
        r = int(rng.integers(m))
        k = int(rng.integers(2, span + 1))
        w = ring_length * k * float(rng.uniform(0.5, 1.0))
        edges.append((a * m + r, a * m + (r + k) % m, w))
    return build_space(edges, **kw)

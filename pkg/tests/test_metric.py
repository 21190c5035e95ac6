import logging
import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from thinspace import build_space, shortest_segment
from thinspace.errors import DisconnectedGraph, EmptyTarget, InputError, NonPositiveEdge, TargetNotInSet
from thinspace.families import cycle_graph, grid_graph, path_graph, tripod
from thinspace.metric import (
    canonical_path_idx,
    inverse_project,
    is_net,
    maximal_segment,
    neighborhood,
    project,
    segment_from_path,
)


@st.composite
def edge_lists(draw, max_n=25, integer=False):
    n = draw(st.integers(2, max_n))
    extra = draw(st.integers(0, n))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    edges = oracles.random_connected_edges(rng, n, extra)
    if integer:
        edges = [(u, v, float(rng.integers(1, 4))) for u, v, _ in edges]
    return edges


@given(edge_lists())
def test_distances_match_networkx(edges):
    X = build_space(edges)
    ref = oracles.all_distances(oracles.nx_graph(edges))
    for u, row in ref.items():
        for v, d in row.items():
            assert math.isclose(X.dist(u, v), d, rel_tol=1e-12, abs_tol=1e-12)


@given(edge_lists(max_n=15))
def test_lazy_and_dense_agree(edges):
    dense = build_space(edges)
    lazy = build_space(edges, dense_limit=0)
    assert not lazy.dense and lazy.dist_matrix is None
    for i in range(dense.n):
        np.testing.assert_allclose(lazy.row(i), dense.row(i))
    np.testing.assert_allclose(lazy.dist_to_set([0, dense.n - 1]), dense.dist_to_set([0, dense.n - 1]))


@given(edge_lists())
def test_metric_axioms(edges):
    d = build_space(edges).dist_matrix
    assert np.all(np.diag(d) == 0)
    assert np.allclose(d, d.T)
    off = d[~np.eye(len(d), dtype=bool)]
    assert np.all(off > 0)
    # triangle inequality through every midpoint
    assert np.all(d[:, None, :] <= d[:, :, None] + d[None, :, :] + 1e-9)


@given(edge_lists(integer=True))
def test_canonical_segments_are_geodesic(edges):
    X = build_space(edges)
    G = oracles.nx_graph(edges)
    for u in list(G.nodes)[:5]:
        for v in G.nodes:
            seg = shortest_segment(X, u, v)
            assert seg.geo_defect <= X.eps * len(seg)
            assert seg.start == u and seg.end == v
            assert math.isclose(seg.length, nx.dijkstra_path_length(G, u, v))
            p = seg.param_array()
            idx = seg.indices
            # every sub-path is geodesic: d(v_i, v_j) = t_j - t_i
            D = X.dist_matrix[np.ix_(idx, idx)]
            assert np.allclose(D, np.abs(p[:, None] - p[None, :]))


def test_canonical_path_breaks_ties_by_smallest_vertex():
    # two shortest routes from 0 to 3 through 1 or 2
    X = build_space([(0, 1, 1), (0, 2, 1), (1, 3, 1), (2, 3, 1)])
    assert shortest_segment(X, 0, 3).path == (0, 1, 3)
    assert shortest_segment(X, 3, 0).path == (3, 1, 0)


def test_path_examples():
    P = path_graph(1000)
    seg = shortest_segment(P, 0, 999)
    assert seg.length == 999 and seg.geo_defect == 0
    assert P.diameter() == 999
    assert maximal_segment(P).length == 999


def test_build_space_errors(caplog):
    with pytest.raises(NonPositiveEdge):
        build_space([(0, 1, 0.0)])
    with pytest.raises(NonPositiveEdge):
        build_space([(0, 1, -1)])
    with pytest.raises(NonPositiveEdge):
        build_space([(0, 1, math.inf)])
    with pytest.raises(DisconnectedGraph):
        build_space([(0, 1, 1), (2, 3, 1)])
    with pytest.raises(DisconnectedGraph):
        build_space([(0, 1, 1)], vertices=[0, 1, 2])
    with pytest.raises(InputError):
        build_space([])
    with pytest.raises(InputError):
        build_space([(0, 1)])
    with caplog.at_level(logging.WARNING):
        X = build_space([(0, 1, 3.0), (1, 0, 2.0)])
    assert X.dist(0, 1) == 2.0
    assert "duplicate" in caplog.text
    assert build_space([(0, 0, 1.0), (0, 1, 1.0)]).n == 2


def test_single_vertex_space():
    X = build_space([], vertices=["a"])
    assert X.n == 1 and X.diameter() == 0
    assert maximal_segment(X).length == 0


def test_unknown_vertex():
    with pytest.raises(InputError):
        path_graph(3).dist(0, 17)


def test_mixed_vertex_ids_are_ordered():
    X = build_space([("b", 2, 1.0), (1, "a", 1.0), (2, 1, 1.0)])
    assert X.vertices == (1, 2, "a", "b")


# -- projections ------------------------------------------------------------------

def test_projection_on_tripod():
    T = tripod((3, 3, 3))
    leg0 = [0, 1000001, 1000002, 1000003]
    tip1 = 2000003
    assert project(T, leg0, tip1) == {0}
    assert project(T, leg0, 1000002) == {1000002}
    fiber = inverse_project(T, leg0, 0, tol=0)
    assert fiber == {0} | {(k + 1) * 10**6 + s for k in (1, 2) for s in (1, 2, 3)}


def test_projection_errors():
    P = path_graph(5)
    with pytest.raises(EmptyTarget):
        project(P, [], 0)
    with pytest.raises(TargetNotInSet):
        inverse_project(P, [0, 1], 3)


@given(edge_lists(), st.data())
def test_projection_properties(edges, data):
    X = build_space(edges)
    verts = list(X.vertices)
    K = data.draw(st.lists(st.sampled_from(verts), min_size=1, unique=True))
    x = data.draw(st.sampled_from(verts))
    dK = min(X.dist(x, k) for k in K)
    P = project(X, K, x)
    assert P and P <= set(K)
    assert all(math.isclose(X.dist(x, p), dK) for p in P)
    if x in K:
        assert P == {x}
    # x lies in the literal fiber of every point of its projection
    for p in P:
        assert x in inverse_project(X, K, p, tol=0)
    # fibers of the points of K cover the space
    covered = set().union(*(inverse_project(X, K, y, tol=0) for y in K))
    assert covered == set(verts)


@given(edge_lists(), st.data())
def test_neighborhood_and_nets(edges, data):
    X = build_space(edges)
    verts = list(X.vertices)
    A = data.draw(st.lists(st.sampled_from(verts), min_size=1, unique=True))
    r = data.draw(st.floats(0.1, 10))
    N = neighborhood(X, A, r)
    assert set(A) <= N
    assert N == {x for x in verts if min(X.dist(x, a) for a in A) < r}
    # A is an r-net of its own open r-neighbourhood
    assert is_net(X, A, N, r)
    assert is_net(X, A, [], 0.0)
    assert not is_net(X, [], A, 1e9)


def test_grid_and_cycle_diameters():
    assert grid_graph(5, 7).diameter() == 10
    assert cycle_graph(10).diameter() == 5
    C = cycle_graph(2000)
    assert maximal_segment(C).length == 1000
    i, j = C.index(0), C.index(1000)
    assert len(canonical_path_idx(C, i, j)) == 1001


@given(edge_lists(max_n=30))
def test_maximal_segment_realizes_diameter(edges):
    X = build_space(edges)
    seg = maximal_segment(X, "exhaustive")
    assert math.isclose(seg.length, X.diameter())
    heur = maximal_segment(X, "double_sweep")
    assert heur.heuristic and heur.length <= seg.length + 1e-12
    assert segment_from_path(X, list(seg.path)).geo_defect == seg.geo_defect


def test_segment_from_path_rejects_non_paths():
    P = path_graph(5)
    with pytest.raises((ValueError, InputError)):
        segment_from_path(P, [0, 2])

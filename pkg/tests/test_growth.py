import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from thinspace import build_space
from thinspace.growth import volume_growth
from thinspace.errors import BadParameters
from thinspace.families import cylinder, grid_graph, path_graph


@settings(max_examples=30)
@given(st.integers(0, 10**6), st.integers(2, 40))
def test_counts_match_networkx(seed, n):
    rng = np.random.default_rng(seed)
    edges = oracles.random_connected_edges(rng, n, int(rng.integers(0, n)))
    X = build_space(edges)
    base = int(rng.integers(n))
    ts = np.sort(rng.uniform(0.1, 20, 6))
    ts = np.unique(ts)
    if ts.size < 2:
        return
    vg = volume_growth(X, base, ts)
    assert list(vg.counts) == oracles.ball_counts_bfs(oracles.nx_graph(edges), base, ts)
    assert list(vg.counts) == sorted(vg.counts)


def test_closed_balls_on_a_path():
    vg = volume_growth(path_graph(101), 50, [1, 2, 10])
    assert vg.counts == (3, 5, 21)
    assert vg.slope == pytest.approx(2) and vg.verdict == "linear"


def test_verdicts():
    C = cylinder(12, 300)
    mid = 150 * 12
    assert volume_growth(C, C.vertices[mid], np.arange(10, 141, 10)).verdict == "linear"
    G = grid_graph(31, 31)
    assert volume_growth(G, G.vertices[15 * 31 + 15], np.arange(1, 16)).verdict == "superlinear"


def test_bad_grid():
    P = path_graph(10)
    with pytest.raises(BadParameters):
        volume_growth(P, 0, [1.0])
    with pytest.raises(BadParameters):
        volume_growth(P, 0, [2.0, 1.0])

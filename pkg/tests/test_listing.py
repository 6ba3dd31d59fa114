import threading
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nucleus import (ParameterError, UndirectedGraph, brute_cliques, count_cliques, degeneracy_order,
                     degree_order, generate_gnp, list_cliques, orient, rec_list_cliques)
from nucleus.graph import identity_order


def as_set(rows):
    return {tuple(sorted(int(x) for x in r)) for r in rows}


def test_fig1_counts(fig1):
    # independently tallied: 7 vertices, 15 edges, 14 triangles, 6 four-cliques, one K5
    assert [count_cliques(fig1, c) for c in range(1, 7)] == [7, 15, 14, 6, 1, 0]


@settings(max_examples=50, deadline=None)
@given(st.integers(4, 16), st.sampled_from([0.2, 0.4, 0.7]), st.integers(0, 10**6), st.integers(1, 5))
def test_listing_matches_brute_force(n, p, seed, c):
    G = generate_gnp(n, p, seed)
    truth = brute_cliques(G, c)
    for ordering in (degeneracy_order(G), degree_order(G), identity_order(n)):
        DG = orient(G, ordering)
        rows = list_cliques(DG, c, nthreads=1 + seed % 3)
        assert rows.shape[0] == len(truth)
        assert as_set(rows) == truth
        if c > 1:
            # rows are in rank order
            assert np.all(np.diff(ordering.position[rows], axis=1) > 0)
    assert count_cliques(G, c, nthreads=2) == len(truth)


def test_thread_counts_agree():
    G = generate_gnp(40, 0.4, 7)
    DG = orient(G, degeneracy_order(G))
    one = list_cliques(DG, 4, 1)
    for th in (2, 4):
        assert np.array_equal(list_cliques(DG, 4, th), one)


def test_bad_size(fig1):
    with pytest.raises(ParameterError):
        count_cliques(fig1, 0)


def test_rec_list_cliques_extends_prefix(fig1):
    DG = orient(fig1, degeneracy_order(fig1))
    # candidates adjacent to both a and b, sorted by rank
    common = np.intersect1d(fig1.adjacency(0), fig1.adjacency(1))
    common = common[np.argsort(DG.rank[common])]
    for jobs in (1, 3):
        found = []
        lock = threading.Lock()

        def f(cl):
            with lock:
                found.append(tuple(sorted(cl)))
        rec_list_cliques(DG, common, 2, (0, 1), f, n_jobs=jobs)
        expected = {tuple(sorted((0, 1) + pair)) for pair in combinations(common.tolist(), 2)
                    if fig1.adjacency(pair[0]).tolist().count(pair[1])}
        assert sorted(found) == sorted(expected)
        assert len(found) == len(set(found))


def test_rec_list_cliques_propagates_errors(fig1):
    DG = orient(fig1, degeneracy_order(fig1))

    def boom(cl):
        raise RuntimeError("stop")
    with pytest.raises(RuntimeError):
        rec_list_cliques(DG, np.array([2, 3, 4]), 1, (0, 1), boom, n_jobs=2)
    with pytest.raises(ParameterError):
        rec_list_cliques(DG, np.array([2]), 0, (), boom)


def test_empty_graph():
    G = UndirectedGraph.from_edges(np.zeros((0, 2)), n=5)
    assert count_cliques(G, 3) == 0
    assert list_cliques(orient(G, degeneracy_order(G)), 3).shape == (0, 3)

import numpy as np
import pytest

from nucleus import OracleCapExceeded, ParameterError, UndirectedGraph, generate_gnp, kcore_numbers, oracle_nucleus
from nucleus.oracle import clique_array

from conftest import tri


def test_fig1_three_four(fig1):
    res = oracle_nucleus(fig1, 3, 4)
    assert len(res.cores) == 14 and res.s_clique_count == 6
    assert res.cores[tri("cdg")] == 0
    for t in ("abf", "aef", "bef"):
        assert res.cores[tri(t)] == 1
    assert res.histogram() == {0: 1, 1: 3, 2: 10}
    assert res.rho == 3
    assert res.k_sequence == [(0, 1), (1, 3), (2, 10)]


def test_kcore_known_graphs(fig1):
    # K5 core 4; f touches three K5 vertices; g sits on edge cd
    assert kcore_numbers(fig1).tolist() == [4, 4, 4, 4, 4, 3, 2]
    path = UndirectedGraph.from_edges([(0, 1), (1, 2), (2, 3)], n=5)
    assert kcore_numbers(path).tolist() == [1, 1, 1, 1, 0]


@pytest.mark.parametrize("seed", range(8))
def test_one_two_is_kcore(seed):
    G = generate_gnp(15, 0.3, seed)
    res = oracle_nucleus(G, 1, 2)
    got = np.array([res.cores[(v,)] for v in range(G.n)])
    assert np.array_equal(got, kcore_numbers(G))


def test_level_semantics():
    # a triangle with a pendant edge: the pendant edge has no triangle, the triangle edges one each
    G = UndirectedGraph.from_edges([(0, 1), (1, 2), (0, 2), (2, 3)])
    res = oracle_nucleus(G, 2, 3)
    assert res.cores == {(0, 1): 1, (0, 2): 1, (1, 2): 1, (2, 3): 0}
    assert res.rho == 2


def test_guards(fig1):
    with pytest.raises(ParameterError):
        oracle_nucleus(fig1, 3, 3)
    with pytest.raises(OracleCapExceeded):
        oracle_nucleus(generate_gnp(41, 0.1), 1, 2)
    assert clique_array(fig1, 8).shape == (0, 8)


def complete(n):
    return UndirectedGraph.from_edges([(i, j) for i in range(n) for j in range(i + 1, n)])


def test_brute_cliques_examples(fig1):
    from nucleus import brute_cliques
    assert len(brute_cliques(complete(5), 4)) == 5
    assert len(brute_cliques(fig1, 3)) == 14
    bip = UndirectedGraph.from_edges([(i, j) for i in range(3) for j in range(3, 7)])
    assert brute_cliques(bip, 3) == set()


def test_small_nuclei():
    res = oracle_nucleus(complete(4), 2, 3)
    assert set(res.cores.values()) == {2} and res.rho == 1
    path = UndirectedGraph.from_edges([(i, i + 1) for i in range(5)])
    assert set(oracle_nucleus(path, 2, 3).cores.values()) == {0}

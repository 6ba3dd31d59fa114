import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nucleus import (GraphParseError, ParameterError, UndirectedGraph, contract, degeneracy_order,
                     degree_order, generate_gnp, generate_rmat, orient, parse_edge_list, read_edge_list,
                     relabel, write_edge_list)
from nucleus.graph import load_binary, save_binary


def edge_sets(max_n=12):
    return st.integers(1, max_n).flatmap(
        lambda n: st.tuples(st.just(n), st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)),
                                                 max_size=n * n)))


def test_from_edges_drops_loops_and_duplicates():
    G = UndirectedGraph.from_edges([(0, 1), (1, 0), (1, 1), (1, 2), (0, 1)])
    assert G.n == 3 and G.m == 2
    assert G.edges().tolist() == [[0, 1], [1, 2]]
    G.validate()


def test_from_edges_rejects_bad_ids():
    with pytest.raises(ParameterError):
        UndirectedGraph.from_edges([(0, -1)])
    with pytest.raises(ParameterError):
        UndirectedGraph.from_edges([(0, 5)], n=3)


def test_validate_catches_asymmetry():
    G = UndirectedGraph(2, np.array([0, 1, 1]), np.array([1]))
    with pytest.raises(ParameterError):
        G.validate()


def test_parse_snap_densifies_by_first_appearance():
    G = parse_edge_list("# comment\n10 20\n\n20\t30\n10 30\n30 10\n")
    assert G.n == 3 and G.m == 3
    assert G.labels.tolist() == [10, 20, 30]


@pytest.mark.parametrize("text,line", [("0 1\n1 x\n", 2), ("0 1 2\n", 1), ("0 1\n# c\n-1 2\n", 3)])
def test_parse_errors_carry_line(text, line):
    with pytest.raises(GraphParseError) as info:
        parse_edge_list(text)
    assert info.value.line == line


def test_parse_empty():
    G = parse_edge_list("# nothing\n")
    assert G.n == 0 and G.m == 0


def test_text_and_binary_round_trip(tmp_path, fig1):
    p = tmp_path / "g.txt"
    write_edge_list(fig1, p)
    again = read_edge_list(p)
    assert again.same_structure(fig1)
    b = tmp_path / "g.bin"
    save_binary(again, b)
    cached = read_edge_list(b)
    assert cached.same_structure(fig1)
    assert np.array_equal(cached.labels, again.labels)
    with pytest.raises(GraphParseError):
        load_binary(p)


def test_fig1_degeneracy(fig1):
    # a..e form a K5 so min-degree peeling reaches degree 4
    assert degeneracy_order(fig1).degeneracy == 4


@settings(max_examples=60, deadline=None)
@given(edge_sets())
def test_orientation_is_acyclic_and_covers_edges(data):
    n, edges = data
    G = UndirectedGraph.from_edges(edges, n=n)
    for ordering in (degeneracy_order(G), degree_order(G)):
        DG = orient(G, ordering)
        assert DG.out_neighbors.shape[0] == G.m
        src = np.repeat(np.arange(n), DG.out_degrees())
        assert np.all(ordering.position[src] < ordering.position[DG.out_neighbors])
        for v in range(n):
            assert np.all(np.diff(ordering.position[DG.out(v)]) > 0)


@settings(max_examples=60, deadline=None)
@given(edge_sets())
def test_degeneracy_bounds_out_degree(data):
    n, edges = data
    G = UndirectedGraph.from_edges(edges, n=n)
    o = degeneracy_order(G)
    DG = orient(G, o)
    assert DG.max_out_degree == o.degeneracy or G.m == 0
    # every vertex has at most `degeneracy` neighbours later in the order
    assert DG.max_out_degree <= max(int(G.degrees().max()), 0)


@settings(max_examples=40, deadline=None)
@given(edge_sets())
def test_relabel_preserves_structure(data):
    n, edges = data
    G = UndirectedGraph.from_edges(edges, n=n)
    o = degeneracy_order(G)
    H = relabel(G, o).validate()
    assert H.m == G.m
    back = o.order[H.edges()]
    assert {tuple(sorted(e)) for e in back.tolist()} == {tuple(e) for e in G.edges().tolist()}
    assert np.array_equal(H.labels[o.position], np.arange(n))


def test_generators_are_deterministic():
    a = generate_rmat(8, 8, seed=3)
    b = generate_rmat(8, 8, seed=3)
    c = generate_rmat(8, 8, seed=4)
    assert a.same_structure(b) and not a.same_structure(c)
    a.validate()
    assert generate_gnp(20, 0.3, 1).same_structure(generate_gnp(20, 0.3, 1))
    with pytest.raises(ParameterError):
        generate_rmat(4, a=0.9)
    with pytest.raises(ParameterError):
        generate_gnp(5, 1.5)


def test_contract_threshold(fig1):
    # kill every edge touching g; c and d lose one of five, g loses both
    src = np.repeat(np.arange(fig1.n), fig1.degrees())
    alive = (src != 6) & (fig1.neighbors != 6)
    loss = np.array([0, 0, 1, 1, 0, 0, 2])
    H = contract(fig1, alive, loss, fraction=0.25)
    assert H.degrees().tolist() == [5, 5, 5, 5, 5, 3, 0]
    H2 = contract(fig1, lambda u, v: 6 not in (u, v), loss, fraction=0.1)
    assert H2.degrees().tolist() == [5, 5, 4, 4, 5, 3, 0]
    H2.validate()


@settings(max_examples=60, deadline=None)
@given(edge_sets(16))
def test_degeneracy_is_max_core(data):
    from nucleus import kcore_numbers
    n, edges = data
    G = UndirectedGraph.from_edges(edges, n=n)
    assert degeneracy_order(G).degeneracy == int(kcore_numbers(G).max())

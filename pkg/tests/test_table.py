import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nucleus import (CliqueNotFoundError, TableConfig, TableConfigError, UndirectedGraph, brute_cliques,
                     build_table, degeneracy_order, generate_gnp, orient)

from conftest import tri


def table(G, r, **kw):
    return build_table(G, orient(G, degeneracy_order(G)), r, TableConfig(**kw))


LAYOUTS = [dict(levels=lv, contiguous=c, inverse_map=inv)
           for lv in (1, 2, 3, 4) for c in (True, False) for inv in ("binary", "pointer")
           if not (inv == "pointer" and not c)]


@pytest.mark.parametrize("r", [1, 2, 3, 4])
@pytest.mark.parametrize("layout", LAYOUTS, ids=lambda d: f"l{d['levels']}-{d['contiguous']}-{d['inverse_map']}")
def test_round_trip_fig1(fig1, r, layout):
    if layout["levels"] > r and r > 1:
        with pytest.raises(TableConfigError):
            table(fig1, r, **layout)
        return
    T = table(fig1, r, **layout)
    truth = brute_cliques(fig1, r)
    assert T.total_cliques == len(truth)
    valid = T.valid_indices()
    assert valid.shape[0] == len(truth)
    seen = set()
    for cl in truth:
        idx = T.index_of(cl)
        assert idx in valid
        seen.add(idx)
        for method in ("binary", "pointer") if layout["contiguous"] else ("binary",):
            assert T.vertices_of(idx, method) == cl
    assert seen == set(valid.tolist())


@settings(max_examples=30, deadline=None)
@given(st.integers(5, 18), st.sampled_from([0.3, 0.6]), st.integers(0, 10**6), st.integers(2, 4),
       st.integers(1, 4), st.booleans())
def test_round_trip_random(n, p, seed, r, levels, contiguous):
    levels = min(levels, r)
    G = generate_gnp(n, p, seed)
    T = table(G, r, levels=levels, contiguous=contiguous, inverse_map="binary")
    truth = brute_cliques(G, r)
    got = {T.vertices_of(int(i)) for i in T.valid_indices()}
    assert got == truth
    assert len({T.index_of(c) for c in truth}) == len(truth)


def test_layout_does_not_change_indices(fig1):
    for lv in (1, 2, 3):
        a = table(fig1, 3, levels=lv, contiguous=True, inverse_map="binary")
        b = table(fig1, 3, levels=lv, contiguous=False, inverse_map="binary")
        for cl in brute_cliques(fig1, 3):
            assert a.index_of(cl) == b.index_of(cl)


def test_two_level_index_rule(fig1):
    # index = slot inside the table of the first vertex + sizes of the earlier tables
    T = table(fig1, 3, levels=2)
    lstart, lcap = T.tt[5], T.tt[6]
    firsts = sorted({c[0] for c in brute_cliques(fig1, 3)})
    for cl in brute_cliques(fig1, 3):
        t = firsts.index(cl[0])
        idx = T.index_of(cl)
        assert lstart[t] <= idx < lstart[t] + lcap[t]
    # tables are laid out in first-vertex order
    assert np.all(np.diff(lstart) > 0)


def test_missing_and_empty(fig1):
    T = table(fig1, 3)
    with pytest.raises(CliqueNotFoundError):
        T.index_of(tri("abg"))
    with pytest.raises(CliqueNotFoundError):
        T.index_of((0, 1))
    empty = np.setdiff1d(np.arange(T.index_space), T.valid_indices())
    with pytest.raises(CliqueNotFoundError):
        T.vertices_of(int(empty[0]))
    with pytest.raises(IndexError):
        T.vertices_of(T.index_space)


def test_counts(fig1):
    T = table(fig1, 3)
    i = T.index_of(tri("abe"))
    T.add_count(i, 5)
    T.add_count(i, -2)
    assert T.get_count(i) == 3


def test_config_errors(fig1):
    with pytest.raises(TableConfigError):
        table(fig1, 3, inverse_map="pointer", contiguous=False)
    with pytest.raises(TableConfigError):
        table(fig1, 3, levels=0)
    with pytest.raises(TableConfigError):
        table(fig1, 3, inverse_map="other")


def test_key_overflow_suggests_levels():
    # 2**22 vertices need 22 bits; three of them do not fit one key
    n = 1 << 22
    G = UndirectedGraph.from_edges([(0, 1), (1, 2), (0, 2)], n=n)
    with pytest.raises(TableConfigError, match="more levels"):
        table(G, 3, levels=1)
    T = table(G, 3, levels=2)
    assert T.vertices_of(T.index_of((0, 1, 2))) == (0, 1, 2)


@pytest.mark.parametrize("r,levels,units", [(3, 1, 42), (3, 2, 35), (3, 3, 50), (4, 1, 24), (4, 3, 22)])
def test_fig1_memory_units(fig1, r, levels, units):
    assert table(fig1, r, levels=levels).memory_units() == units


def test_memory_report_fields(fig1):
    rep = table(fig1, 3, levels=3).memory_report()
    assert rep["levels"] == 3 and rep["total_cliques"] == 14
    assert len(rep["entries_per_level"]) == 3 and rep["entries_per_level"][-1] == 14
    assert rep["key_memory_bytes"] > 0


def complete(n):
    return UndirectedGraph.from_edges([(i, j) for i in range(n) for j in range(i + 1, n)])


def test_fresh_and_counted_k5():
    from nucleus.peeling import count_phase
    G = complete(5)
    DG = orient(G, degeneracy_order(G))
    T = build_table(G, DG, 3, TableConfig())
    valid = T.valid_indices()
    assert T.total_cliques == 10 and np.all(T.counts == 0)
    count_phase(G, DG, 3, 4, T, L=12)
    assert all(T.get_count(int(i)) == 24 for i in valid)


def test_concurrent_fractional_adds(fig1):
    from concurrent.futures import ThreadPoolExecutor
    T = table(fig1, 3)
    i = T.index_of(tri("abe"))
    T.add_count(i, 12)
    T.add_count(i, -12)
    assert T.get_count(i) == 0
    with ThreadPoolExecutor(3) as ex:
        list(ex.map(lambda _: T.add_count(i, 4), range(3)))
    assert T.get_count(i) == 12


def test_fig1_counts_in_units_of_l(fig1):
    from nucleus.peeling import count_phase
    DG = orient(fig1, degeneracy_order(fig1))
    T = build_table(fig1, DG, 3, TableConfig(levels=3))
    count_phase(fig1, DG, 3, 4, T, L=12)
    units = {c: T.get_count(T.index_of(c)) // 12 for c in brute_cliques(fig1, 3)}
    special = {tri("cdg"): 0, tri("abf"): 1, tri("aef"): 1, tri("bef"): 1, tri("abe"): 3}
    assert all(units[c] == special.get(c, 2) for c in units)


@pytest.mark.parametrize("levels", [1, 2, 3])
def test_r1_table_is_direct(fig1, levels):
    T = table(fig1, 1, levels=levels)
    assert T.levels == 1 and T.valid_indices().tolist() == list(range(7))
    assert T.memory_report()["slots_per_level"] == [7 + 1]
    assert T.vertices_of(T.index_of((4,))) == (4,)


def test_two_level_k30_smaller():
    G = complete(30)
    one = table(G, 3, levels=1).key_memory_bytes
    two = table(G, 3, levels=2).key_memory_bytes
    assert two < one

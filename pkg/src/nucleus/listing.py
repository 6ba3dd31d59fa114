"""Recursive clique listing over a low out-degree orientation.

The numba side exposes the recursion as a resumable iterator (``list_step``)
so every kernel that consumes cliques can drive it inline. The Python
``rec_list_cliques`` accepts any callback and is meant for small graphs.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np
from numba import njit

from ._atomic import atomic_add, atomic_counter
from ._parallel import chunk_size, run_workers
from .exceptions import ParameterError
from .graph import DirectedGraph, UndirectedGraph, degeneracy_order, orient


# ------------------------------------------------------------------ kernels

@njit(nogil=True, cache=True)
def list_step(dg_off, dg_nbr, rank, buf, sz, pos, clique, base, rl, depth):
    """Advance a listing stack to the next clique.

    ``buf[d, :sz[d]]`` is the rank-sorted candidate set at depth ``d`` and
    ``pos[d]`` the next candidate to try. Chosen vertices are written to
    ``clique[base + d]``. Returns True when ``clique[:base + rl]`` holds a new
    clique, False once the stack is exhausted. ``depth`` is a 1-cell state.
    """
    d = depth[0]
    while d >= 0:
        if pos[d] >= sz[d]:
            d -= 1
            continue
        v = buf[d, pos[d]]
        pos[d] += 1
        clique[base + d] = v
        if d == rl - 1:
            depth[0] = d
            return True
        # candidates before v rank lower, so only the suffix can meet out(v)
        k = 0
        a = pos[d]
        b = dg_off[v]
        e = dg_off[v + 1]
        while a < sz[d] and b < e:
            x = buf[d, a]
            y = dg_nbr[b]
            if x == y:
                buf[d + 1, k] = x
                k += 1
                a += 1
                b += 1
            elif rank[x] < rank[y]:
                a += 1
            else:
                b += 1
        if k < rl - 1 - d:
            continue
        sz[d + 1] = k
        pos[d + 1] = 0
        d += 1
    depth[0] = -1
    return False


@njit(nogil=True, cache=True)
def list_start(buf, sz, pos, depth, cand, ncand):
    for i in range(ncand):
        buf[0, i] = cand[i]
    sz[0] = ncand
    pos[0] = 0
    depth[0] = 0


@njit(nogil=True, cache=True)
def _count_worker(w, cursor, chunk, dg_off, dg_nbr, rank, c, width, per_root):
    n = dg_off.shape[0] - 1
    buf = np.empty((c, width), dtype=np.int64)
    sz = np.zeros(c, dtype=np.int64)
    pos = np.zeros(c, dtype=np.int64)
    depth = np.zeros(1, dtype=np.int64)
    clique = np.empty(c, dtype=np.int64)
    while True:
        lo = atomic_add(cursor, 0, chunk)
        if lo >= n:
            break
        for v in range(lo, min(n, lo + chunk)):
            d = dg_off[v + 1] - dg_off[v]
            if d < c - 1:
                continue
            clique[0] = v
            list_start(buf, sz, pos, depth, dg_nbr[dg_off[v]:dg_off[v + 1]], d)
            cnt = 0
            while list_step(dg_off, dg_nbr, rank, buf, sz, pos, clique, 1, c - 1, depth):
                cnt += 1
            per_root[v] = cnt
    return 0


@njit(nogil=True, cache=True)
def _fill_worker(w, cursor, chunk, dg_off, dg_nbr, rank, c, width, start, out):
    n = dg_off.shape[0] - 1
    buf = np.empty((c, width), dtype=np.int64)
    sz = np.zeros(c, dtype=np.int64)
    pos = np.zeros(c, dtype=np.int64)
    depth = np.zeros(1, dtype=np.int64)
    clique = np.empty(c, dtype=np.int64)
    while True:
        lo = atomic_add(cursor, 0, chunk)
        if lo >= n:
            break
        for v in range(lo, min(n, lo + chunk)):
            if start[v + 1] == start[v]:
                continue
            clique[0] = v
            d = dg_off[v + 1] - dg_off[v]
            list_start(buf, sz, pos, depth, dg_nbr[dg_off[v]:dg_off[v + 1]], d)
            row = start[v]
            while list_step(dg_off, dg_nbr, rank, buf, sz, pos, clique, 1, c - 1, depth):
                for i in range(c):
                    out[row, i] = clique[i]
                row += 1
    return 0


def _per_root_counts(DG: DirectedGraph, c, nthreads):
    per_root = np.zeros(DG.n, dtype=np.int64)
    width = max(DG.max_out_degree, 1)
    run_workers(_count_worker, nthreads, atomic_counter(), chunk_size(DG.n, nthreads),
                DG.out_offsets, DG.out_neighbors, DG.rank, c, width, per_root)
    return per_root


# --------------------------------------------------------------- public API

def list_cliques(DG: DirectedGraph, c, nthreads=1) -> np.ndarray:
    """All ``c``-cliques as rows, each in rank order; rows grouped by first vertex."""
    if c < 1:
        raise ParameterError("clique size must be >= 1")
    if c == 1:
        return np.arange(DG.n, dtype=np.int64).reshape(-1, 1)
    if c == 2:
        src = np.repeat(np.arange(DG.n, dtype=np.int64), DG.out_degrees())
        return np.stack([src, DG.out_neighbors], axis=1)
    per_root = _per_root_counts(DG, c, nthreads)
    start = np.zeros(DG.n + 1, dtype=np.int64)
    np.cumsum(per_root, out=start[1:])
    out = np.empty((int(start[-1]), c), dtype=np.int64)
    width = max(DG.max_out_degree, 1)
    run_workers(_fill_worker, nthreads, atomic_counter(), chunk_size(DG.n, nthreads),
                DG.out_offsets, DG.out_neighbors, DG.rank, c, width, start, out)
    return out


def count_cliques(G: UndirectedGraph, c, nthreads=1, ordering=None) -> int:
    """Number of ``c``-cliques in ``G``."""
    if c < 1:
        raise ParameterError("clique size must be >= 1")
    if c == 1:
        return G.n
    if c == 2:
        return G.m
    DG = orient(G, ordering if ordering is not None else degeneracy_order(G))
    return int(_per_root_counts(DG, c, nthreads).sum())


def intersect(base, v, DG: DirectedGraph) -> np.ndarray:
    """Members of ``base`` that are out-neighbors of ``v``, order of ``base`` kept."""
    base = np.asarray(base, dtype=np.int64)
    return base[np.isin(base, DG.out(v))]


def rec_list_cliques(DG: DirectedGraph, I, rl, C, f, n_jobs=1):
    """Call ``f`` once for every clique ``C + (v_1..v_rl)`` with the ``v_i`` drawn from ``I``.

    ``I`` must be sorted by rank and fully adjacent to ``C``. The outer loop
    runs on ``n_jobs`` threads, so ``f`` must tolerate concurrent calls.
    Exceptions raised by ``f`` propagate.
    """
    if rl < 1:
        raise ParameterError("recursion level must be >= 1")
    I = np.asarray(I, dtype=np.int64)
    C = tuple(int(x) for x in C)

    def rec(cand, level, prefix):
        if level == 1:
            for v in cand:
                f(prefix + (int(v),))
            return
        for v in cand:
            rec(intersect(cand, v, DG), level - 1, prefix + (int(v),))

    def outer(v):
        if rl == 1:
            f(C + (int(v),))
        else:
            rec(intersect(I, v, DG), rl - 1, C + (int(v),))

    if n_jobs <= 1 or I.shape[0] < 2:
        for v in I:
            outer(v)
        return
    with ThreadPoolExecutor(max_workers=n_jobs) as ex:
        for fut in [ex.submit(outer, v) for v in I]:
            fut.result()

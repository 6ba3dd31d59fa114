"""Brute-force reference answers for small graphs.

Everything here enumerates subsets directly and recounts from scratch every
round. It shares no code with the parallel pipeline apart from the graph type.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import chain, combinations

import numpy as np

from .exceptions import OracleCapExceeded, ParameterError
from .graph import UndirectedGraph

DEFAULT_CAP = 40


@dataclass
class OracleResult:
    cores: dict
    rho: int
    s_clique_count: int
    k_sequence: list

    def histogram(self) -> dict:
        vals, cnts = np.unique(np.fromiter(self.cores.values(), dtype=np.int64, count=len(self.cores)),
                               return_counts=True)
        return {int(v): int(c) for v, c in zip(vals, cnts)}


@lru_cache(maxsize=64)
def _subsets(n, c):
    flat = np.fromiter(chain.from_iterable(combinations(range(n), c)), dtype=np.int64)
    return flat.reshape(-1, c)


def _adjacency(G):
    adj = np.zeros((G.n, G.n), dtype=bool)
    e = G.edges()
    adj[e[:, 0], e[:, 1]] = True
    adj[e[:, 1], e[:, 0]] = True
    return adj


def clique_array(G: UndirectedGraph, c, cap=DEFAULT_CAP) -> np.ndarray:
    """All ``c``-cliques as ascending rows, lexicographically ordered."""
    if c < 1:
        raise ParameterError("clique size must be >= 1")
    if G.n > cap:
        raise OracleCapExceeded(f"oracle refuses n={G.n} > cap={cap}")
    if c > G.n:
        return np.zeros((0, c), dtype=np.int64)
    subsets = _subsets(G.n, c)
    adj = _adjacency(G)
    keep = np.ones(subsets.shape[0], dtype=bool)
    for i, j in combinations(range(c), 2):
        keep &= adj[subsets[:, i], subsets[:, j]]
    return subsets[keep]


def brute_cliques(G: UndirectedGraph, c, cap=DEFAULT_CAP) -> set:
    return {tuple(int(x) for x in row) for row in clique_array(G, c, cap)}


def oracle_nucleus(G: UndirectedGraph, r, s, cap=DEFAULT_CAP) -> OracleResult:
    """Peel by full recount: each round removes every r-clique whose count is at most the current level."""
    if not 1 <= r < s:
        raise ParameterError(f"need 1 <= r < s, got r={r}, s={s}")
    R = clique_array(G, r, cap)
    S = clique_array(G, s, cap)
    nr = R.shape[0]
    # r-subsets of each s-clique, as row numbers of R
    base = max(G.n, 1)
    rkey = np.zeros(nr, dtype=np.int64)
    for j in range(r):
        rkey = rkey * base + R[:, j]
    member = np.zeros((S.shape[0], len(list(combinations(range(s), r)))), dtype=np.int64)
    for col, pos in enumerate(combinations(range(s), r)):
        key = np.zeros(S.shape[0], dtype=np.int64)
        for j in pos:
            key = key * base + S[:, j]
        member[:, col] = np.searchsorted(rkey, key)

    alive = np.ones(nr, dtype=bool)
    core = np.full(nr, -1, dtype=np.int64)
    level = 0
    rounds = 0
    seq = []
    while alive.any():
        live_s = alive[member].all(axis=1) if member.size else np.zeros(0, dtype=bool)
        count = np.bincount(member[live_s].ravel(), minlength=nr)
        level = max(level, int(count[alive].min()))
        peel = alive & (count <= level)
        core[peel] = level
        alive &= ~peel
        rounds += 1
        seq.append((level, int(peel.sum())))
    cores = {tuple(int(x) for x in row): int(c) for row, c in zip(R, core)}
    return OracleResult(cores, rounds, int(S.shape[0]), seq)


def kcore_numbers(G: UndirectedGraph) -> np.ndarray:
    """Textbook k-core: repeatedly delete a minimum-degree vertex."""
    adj = [set(G.adjacency(v).tolist()) for v in range(G.n)]
    deg = {v: len(adj[v]) for v in range(G.n)}
    core = np.zeros(G.n, dtype=np.int64)
    k = 0
    while deg:
        v = min(deg, key=deg.get)
        k = max(k, deg.pop(v))
        core[v] = k
        for w in adj[v]:
            if w in deg:
                deg[w] -= 1
                adj[w].discard(v)
    return core

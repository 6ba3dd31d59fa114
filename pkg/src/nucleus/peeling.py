"""Peeling driver: count s-cliques per r-clique, then peel bucket by bucket.

Counts are fixed-point integers scaled by ``L = lcm(1..binomial(s, r))`` so
that splitting one s-clique between the ``a`` r-cliques peeled together is
exact: each of them removes ``L // a`` from every surviving r-subset.
"""
from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from numba import njit

from ._atomic import atomic_add, atomic_counter
from ._parallel import EntryCache, chunk_size, run_workers
from .aggregation import UpdateAggregator, agg_claim
from .bucketing import init_buckets
from .exceptions import InvariantViolation, ParameterError
from .graph import (UndirectedGraph, cpu_count, identity_order, make_ordering, orient,
                    relabel as relabel_graph)
from .listing import list_start, list_step
from .table import CliqueTable, TableConfig, build_table, lookup, vertices_binary, vertices_pointer

STATUS_LIVE, STATUS_PEELING, STATUS_DONE = 0, 1, 2
ERR_MISSING, ERR_INVERSE, ERR_LOG = 1, 2, 3
MAX_SCALE = 1 << 48


def fixed_point_scale(r, s) -> int:
    """``lcm(1..binomial(s, r))``: makes every ``1/a`` share an exact integer."""
    if not 1 <= r < s:
        raise ParameterError(f"need 1 <= r < s, got r={r}, s={s}")
    a_max = math.comb(s, r)
    # lcm(1..a) passes 2**48 well before a reaches 64; stop before building a huge integer
    L = math.lcm(*range(1, min(a_max, 64) + 1))
    if a_max > 64 or L > MAX_SCALE:
        raise ParameterError(f"fixed-point scale for ({r},{s}) does not fit the counter word")
    return L


def subset_positions(s, r) -> np.ndarray:
    """All r-subsets of positions 0..s-1 in lexicographic order."""
    from itertools import combinations
    return np.array(list(combinations(range(s), r)), dtype=np.int64).reshape(-1, r)


# ------------------------------------------------------------------ kernels

@njit(nogil=True, cache=True)
def _sort_small(src, dst, n):
    for i in range(n):
        x = src[i]
        j = i
        while j > 0 and dst[j - 1] > x:
            dst[j] = dst[j - 1]
            j -= 1
        dst[j] = x


@njit(nogil=True, cache=True)
def _count_worker(w, cursor, chunk, dg_off, dg_nbr, rank, s, width, combos, tt, counts, L, err):
    n = dg_off.shape[0] - 1
    r = combos.shape[1]
    buf = np.empty((s, width), dtype=np.int64)
    sz = np.zeros(s, dtype=np.int64)
    pos = np.zeros(s, dtype=np.int64)
    depth = np.zeros(1, dtype=np.int64)
    clique = np.empty(s, dtype=np.int64)
    S = np.empty(s, dtype=np.int64)
    sub = np.empty(r, dtype=np.int64)
    while True:
        lo = atomic_add(cursor, 0, chunk)
        if lo >= n:
            break
        for v in range(lo, min(n, lo + chunk)):
            d = dg_off[v + 1] - dg_off[v]
            if d < s - 1:
                continue
            clique[0] = v
            list_start(buf, sz, pos, depth, dg_nbr[dg_off[v]:dg_off[v + 1]], d)
            while list_step(dg_off, dg_nbr, rank, buf, sz, pos, clique, 1, s - 1, depth):
                _sort_small(clique, S, s)
                for c in range(combos.shape[0]):
                    for i in range(r):
                        sub[i] = S[combos[c, i]]
                    idx = lookup(tt, sub)
                    if idx < 0:
                        err[0] = ERR_MISSING
                    else:
                        atomic_add(counts, idx, L)
    return 0


@njit(nogil=True, cache=True)
def _member(arr, lo, hi, x):
    end = hi
    while lo < hi:
        mid = (lo + hi) >> 1
        if arr[mid] < x:
            lo = mid + 1
        else:
            hi = mid
    return lo < end and arr[lo] == x


@njit(nogil=True, cache=True)
def _update_worker(w, cursor, chunk, A, tt, use_pointer, g_off, g_nbr, g_len, rank, rank_is_id,
                   dg_off, dg_nbr, s, width, combos, counts, status, L, agg,
                   log, log_cursor, round_no, err):
    r = combos.shape[1]
    rl = s - r
    R = np.empty(r, dtype=np.int64)
    I = np.empty(width, dtype=np.int64)
    buf = np.empty((rl, width), dtype=np.int64)
    sz = np.zeros(rl, dtype=np.int64)
    pos = np.zeros(rl, dtype=np.int64)
    depth = np.zeros(1, dtype=np.int64)
    clique = np.empty(s, dtype=np.int64)
    S = np.empty(s, dtype=np.int64)
    sub = np.empty(r, dtype=np.int64)
    sub_idx = np.empty(combos.shape[0], dtype=np.int64)
    logging = log.shape[0] > 0
    total = A.shape[0]
    while True:
        lo = atomic_add(cursor, 0, chunk)
        if lo >= total:
            break
        for ai in range(lo, min(total, lo + chunk)):
            if use_pointer:
                ok = vertices_pointer(tt, A[ai], R)
            else:
                ok = vertices_binary(tt, A[ai], R)
            if not ok:
                err[0] = ERR_INVERSE
                continue
            # common neighbors of R, starting from its shortest list
            best = R[0]
            for i in range(1, r):
                if g_len[R[i]] < g_len[best]:
                    best = R[i]
            m = g_len[best]
            for j in range(m):
                I[j] = g_nbr[g_off[best] + j]
            for i in range(r):
                u = R[i]
                if u == best:
                    continue
                k = 0
                for j in range(m):
                    if _member(g_nbr, g_off[u], g_off[u] + g_len[u], I[j]):
                        I[k] = I[j]
                        k += 1
                m = k
                if m < rl:
                    break
            if m < rl:
                continue
            if not rank_is_id:
                keys = rank[I[:m]]
                order = np.argsort(keys)
                tmp = I[:m].copy()
                for j in range(m):
                    I[j] = tmp[order[j]]
            for i in range(r):
                clique[i] = R[i]
            list_start(buf, sz, pos, depth, I, m)
            while list_step(dg_off, dg_nbr, rank, buf, sz, pos, clique, r, rl, depth):
                _sort_small(clique, S, s)
                a = 0
                skip = False
                for c in range(combos.shape[0]):
                    for i in range(r):
                        sub[i] = S[combos[c, i]]
                    j = lookup(tt, sub)
                    if j < 0:
                        err[0] = ERR_MISSING
                        skip = True
                        break
                    sub_idx[c] = j
                    st = status[j]
                    if st == STATUS_DONE:
                        skip = True
                        break
                    if st == STATUS_PEELING:
                        a += 1
                if skip:
                    continue
                dec = L // a
                for c in range(combos.shape[0]):
                    j = sub_idx[c]
                    if status[j] != STATUS_LIVE:
                        continue
                    atomic_add(counts, j, -dec)
                    agg_claim(agg, j, w)
                    if logging:
                        row = atomic_add(log_cursor, 0, 1)
                        if row < log.shape[0]:
                            log[row, 0] = round_no
                            log[row, 1] = j
                            log[row, 2] = dec
                            for i in range(s):
                                log[row, 3 + i] = S[i]
                        else:
                            err[0] = ERR_LOG
    return 0


@njit(nogil=True, cache=True)
def _contract_lists(g_off, g_nbr, g_len, loss, fraction, tt, status):
    """Drop peeled edges from lists of vertices that lost enough of them."""
    n = g_len.shape[0]
    e = np.empty(2, dtype=np.int64)
    rebuilt = 0
    for v in range(n):
        ln = g_len[v]
        if loss[v] == 0 or loss[v] < fraction * ln:
            continue
        base = g_off[v]
        k = 0
        for j in range(base, base + ln):
            u = g_nbr[j]
            if u < v:
                e[0] = u
                e[1] = v
            else:
                e[0] = v
                e[1] = u
            idx = lookup(tt, e)
            if idx >= 0 and status[idx] == STATUS_DONE:
                continue
            g_nbr[base + k] = u
            k += 1
        g_len[v] = k
        loss[v] = 0
        rebuilt += 1
    return rebuilt


@njit(nogil=True, cache=True)
def _all_vertices(tt, ids, use_pointer, out):
    row = np.empty(out.shape[1], dtype=np.int64)
    for i in range(ids.shape[0]):
        if use_pointer:
            ok = vertices_pointer(tt, ids[i], row)
        else:
            ok = vertices_binary(tt, ids[i], row)
        if not ok:
            return False
        for j in range(row.shape[0]):
            out[i, j] = row[j]
    return True


@njit(nogil=True, cache=True)
def _edge_endpoints_loss(tt, A, use_pointer, loss):
    e = np.empty(2, dtype=np.int64)
    for i in range(A.shape[0]):
        if use_pointer:
            vertices_pointer(tt, A[i], e)
        else:
            vertices_binary(tt, A[i], e)
        loss[e[0]] += 1
        loss[e[1]] += 1


# ------------------------------------------------------------ configuration

@dataclass
class PeelConfig:
    """Tuning knobs. ``None`` means the per-(r, s) default."""

    levels: int = 2
    contiguous: bool = True
    inverse_map: str = "pointer"
    relabel: bool | None = None
    aggregation: str | None = None
    buffer_size: int = 64
    contract: bool | None = None
    contract_edge_factor: float = 2.0
    contract_fraction: float = 0.25
    bucket: str = "open"
    orientation: str = "degeneracy"
    threads: int = 1
    seed: int = 0

    def resolved(self, r, s) -> "PeelConfig":
        triangle = (r, s) == (2, 3)
        threads = cpu_count() if self.threads in (0, -1, None) else int(self.threads)
        return replace(
            self,
            levels=1 if r == 1 else self.levels,
            relabel=(not triangle) if self.relabel is None else bool(self.relabel),
            aggregation=("hash" if triangle else "list-buffer") if self.aggregation is None else self.aggregation,
            contract=triangle if self.contract is None else bool(self.contract) and triangle,
            threads=max(1, threads),
        )

    def table_config(self) -> TableConfig:
        return TableConfig(levels=self.levels, contiguous=self.contiguous,
                           inverse_map=self.inverse_map, seed=0x5EED + int(self.seed))


@dataclass
class Prepared:
    """Everything up to and including the counting pass; reusable across peel configurations."""

    G: UndirectedGraph
    work: UndirectedGraph
    DG: object
    rank_is_id: bool
    to_input: np.ndarray
    table: CliqueTable
    counts: np.ndarray
    r: int
    s: int
    L: int
    combos: np.ndarray
    config: PeelConfig
    timings: dict = field(default_factory=dict)


@dataclass
class PeelResult:
    """Core numbers per r-clique.

    ``cliques[i]`` (input vertex IDs, ascending) has core ``cores[i]`` and
    table index ``indices[i]``; ``core`` is the full index-space array with
    -1 on unoccupied cells.
    """

    r: int
    s: int
    core: np.ndarray
    indices: np.ndarray
    cliques: np.ndarray
    cores: np.ndarray
    rho: int
    max_core: int
    total_cliques: int
    k_sequence: list
    timings: dict
    config: dict
    memory: dict
    events: np.ndarray | None = None
    table: CliqueTable | None = field(default=None, repr=False)
    L: int = 1
    contractions: int = 0
    quiescent_violations: int = 0

    def histogram(self) -> dict:
        vals, cnts = np.unique(self.cores, return_counts=True)
        return {int(v): int(c) for v, c in zip(vals, cnts)}

    def as_dict(self) -> dict:
        return {tuple(int(x) for x in row): int(c) for row, c in zip(self.cliques, self.cores)}


# ---------------------------------------------------------------- pipeline

def count_phase(G, DG, r, s, tbl: CliqueTable, nthreads=1, L=None, rank=None):
    """Add ``L`` to every r-subset of every s-clique of ``G`` in ``tbl.counts``."""
    L = fixed_point_scale(r, s) if L is None else L
    combos = subset_positions(s, r)
    err = np.zeros(1, dtype=np.int64)
    width = max(DG.max_out_degree, 1)
    run_workers(_count_worker, nthreads, atomic_counter(), chunk_size(DG.n, nthreads),
                DG.out_offsets, DG.out_neighbors, DG.rank if rank is None else rank,
                s, width, combos, tbl.tt, tbl.counts, L, err)
    if err[0]:
        raise InvariantViolation("an r-subset of a listed s-clique is missing from the table")
    return tbl.counts


def prepare(G: UndirectedGraph, r, s, config: PeelConfig | None = None) -> Prepared:
    """Orient, optionally relabel, build the table and run the counting pass."""
    L = fixed_point_scale(r, s)
    cfg = (config or PeelConfig()).resolved(r, s)
    timings = {}
    t0 = time.perf_counter()
    ordering = make_ordering(G, cfg.orientation)
    if cfg.relabel:
        work = relabel_graph(G, ordering)
        DG = orient(work, identity_order(G.n))
        to_input = ordering.order.astype(np.int64)
        rank_is_id = True
    else:
        work = G
        DG = orient(G, ordering)
        to_input = np.arange(G.n, dtype=np.int64)
        rank_is_id = ordering.is_identity()
    t1 = time.perf_counter()
    table = build_table(work, DG, r, cfg.table_config(), nthreads=cfg.threads)
    t2 = time.perf_counter()
    count_phase(work, DG, r, s, table, cfg.threads, L)
    t3 = time.perf_counter()
    timings.update(orient=t1 - t0, build=t2 - t1, count=t3 - t2)
    return Prepared(G, work, DG, rank_is_id, to_input, table, table.counts.copy(), r, s, L,
                    subset_positions(s, r), cfg, timings)


def peel(prep: Prepared, config: PeelConfig | None = None, instrument=False, corrupt=None) -> PeelResult:
    """Run the round loop on a prepared table.

    ``config`` may override peel-time settings (inverse map, aggregation,
    buckets, threads, contraction); table-shaping settings come from ``prep``.
    ``corrupt=(i, delta)`` adds ``delta`` whole s-cliques to the i-th stored clique
    before peeling (test hook).
    """
    r, s, L = prep.r, prep.s, prep.L
    cfg = prep.config if config is None else config.resolved(r, s)
    tbl = prep.table
    use_pointer = cfg.inverse_map == "pointer"
    if use_pointer and not tbl.cfg.contiguous:
        raise ParameterError("stored-pointer inverse map needs a contiguous table")
    nthreads = cfg.threads
    counts = prep.counts.copy()
    valid = tbl.valid_indices()
    if corrupt is not None and valid.size:
        counts[valid[int(corrupt[0]) % max(1, valid.shape[0])]] += int(corrupt[1]) * L
    if np.any(counts[valid] < 0):
        raise InvariantViolation("negative count before peeling")
    total = tbl.total_cliques
    status = np.zeros(tbl.index_space, dtype=np.int8)
    core = np.full(tbl.index_space, -1, dtype=np.int64)
    B = init_buckets(counts[valid] // L, cfg.bucket, ids=valid)
    agg = UpdateAggregator(cfg.aggregation, tbl.index_space, nthreads, cfg.buffer_size)

    work = prep.work
    g_off = work.offsets
    contracting = cfg.contract and (r, s) == (2, 3)
    g_nbr = work.neighbors.copy() if contracting else work.neighbors
    g_len = work.degrees().copy()
    width = max(int(g_len.max()) if g_len.size else 1, 1)
    loss = np.zeros(work.n, dtype=np.int64)
    peeled_since = 0
    contractions = 0
    DG = prep.DG
    rank = DG.rank
    per_clique = (math.comb(s, r) - 1) * math.comb(width, s - r)

    if instrument:
        cap = int(np.sum(counts[valid] // L)) * math.comb(s, r) + 16
        log = np.zeros((cap, 3 + s), dtype=np.int64)
    else:
        log = np.zeros((0, 3 + s), dtype=np.int64)
    log_cursor = atomic_counter()
    err = np.zeros(1, dtype=np.int64)
    quiescent_bad = 0

    fast = EntryCache()
    finished = 0
    rounds = 0
    ks = []
    t_peel = time.perf_counter()
    while finished < total:
        k, A = B.next_bucket()
        rounds += 1
        ks.append((int(k), int(A.shape[0])))
        core[A] = k
        status[A] = STATUS_PEELING
        finished += A.shape[0]
        U = None
        if finished < total:
            agg.begin_round(rounds, A.shape[0] * per_clique)
            args = (atomic_counter(), chunk_size(A.shape[0], nthreads, hi=64),
                    A, tbl.tt, use_pointer, g_off, g_nbr, g_len, rank, prep.rank_is_id,
                    DG.out_offsets, DG.out_neighbors, s, width, prep.combos, counts, status, L,
                    agg.state(), log, log_cursor, rounds, err)
            run_workers(fast.get_entry(_update_worker, 0, *args), nthreads, *args)
            if err[0]:
                raise InvariantViolation(f"update kernel failed with code {int(err[0])}")
            U = agg.finalize()
        status[A] = STATUS_DONE
        if U is not None and U.size:
            vals = counts[U]
            if np.any(vals < 0):
                raise InvariantViolation("negative count after a round")
            if instrument and np.any(vals % L):
                quiescent_bad += int(np.count_nonzero(vals % L))
            B.update(U, vals // L)
        if contracting:
            fast(_edge_endpoints_loss, tbl.tt, A, use_pointer, loss)
            peeled_since += A.shape[0]
            if peeled_since >= cfg.contract_edge_factor * work.n:
                fast(_contract_lists, g_off, g_nbr, g_len, loss, cfg.contract_fraction, tbl.tt, status)
                peeled_since = 0
                contractions += 1
    t_end = time.perf_counter()

    cliques = np.empty((valid.shape[0], r), dtype=np.int64)
    if not _all_vertices(tbl.tt, valid, use_pointer, cliques):
        raise InvariantViolation("inverse map failed on an occupied cell")
    cliques = np.sort(prep.to_input[cliques], axis=1)
    cores = core[valid]
    timings = dict(prep.timings)
    timings["peel"] = t_end - t_peel
    conf = asdict(cfg)
    conf.update(r=r, s=s)
    events = None
    if instrument:
        events = log[:min(int(log_cursor[0]), log.shape[0])].copy()
    res = PeelResult(r, s, core, valid, cliques, cores, rounds,
                     int(cores.max()) if cores.size else 0, total, ks, timings, conf,
                     tbl.memory_report(), events, tbl, L, contractions, quiescent_bad)
    return res


def nucleus_decomposition(G: UndirectedGraph, r, s, config: PeelConfig | None = None, **kw) -> PeelResult:
    """Core number of every r-clique of ``G`` with respect to s-cliques."""
    if config is None:
        config = PeelConfig(**kw)
    elif kw:
        config = replace(config, **kw)
    prep = prepare(G, r, s, config)
    return peel(prep)

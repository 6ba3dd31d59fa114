"""Collecting the cliques whose counts changed during a peel round.

Three strategies share one claim kernel:

* ``array``: every first touch takes a slot from one shared cursor;
* ``list-buffer``: each worker reserves ``block`` slots at a time and fills
  them privately, unused tails are filtered out at the end of the round;
* ``hash``: touched ids are inserted into a per-round open-addressing set,
  which deduplicates by itself.

For the first two a per-id round stamp decides who touched an id first.
"""
from __future__ import annotations

import numpy as np
from numba import njit

from ._atomic import atomic_add, atomic_cas
from .exceptions import ParameterError
from .table import mix64

STRATEGIES = ("array", "list-buffer", "hash")
S_ARRAY, S_LIST, S_HASH = 0, 1, 2
# meta layout: strategy, round, block, hash capacity
A_STRAT, A_ROUND, A_BLOCK, A_HCAP = range(4)


@njit(nogil=True, cache=True)
def agg_claim(agg, idx, w):
    """Record ``idx`` for this round; True only for the first caller."""
    meta = agg[0]
    strategy = meta[A_STRAT]
    if strategy == S_HASH:
        htab = agg[6]
        mask = meta[A_HCAP] - 1
        h = np.int64(mix64(np.uint64(idx)) & np.uint64(mask))
        while True:
            c = htab[h]
            if c == idx:
                return False
            if c == -1:
                if atomic_cas(htab, h, -1, idx):
                    return True
                continue
            h = (h + 1) & mask
    stamp = agg[1]
    rnd = meta[A_ROUND]
    while True:
        old = stamp[idx]
        if old == rnd:
            return False
        if atomic_cas(stamp, idx, old, rnd):
            break
    U = agg[2]
    cursor = agg[3]
    if strategy == S_ARRAY:
        U[atomic_add(cursor, 0, 1)] = idx
        return True
    lb_pos = agg[4]
    lb_end = agg[5]
    if lb_pos[w] == lb_end[w]:
        block = meta[A_BLOCK]
        lb_pos[w] = atomic_add(cursor, 0, block)
        lb_end[w] = lb_pos[w] + block
    U[lb_pos[w]] = idx
    lb_pos[w] += 1
    return True


@njit(nogil=True, cache=True)
def _claim_many(agg, ids, w, out):
    for i in range(ids.shape[0]):
        out[i] = agg_claim(agg, ids[i], w)


def _next_pow2(x):
    return 1 << max(1, int(x - 1).bit_length())


class UpdateAggregator:
    """Per-round set of touched clique ids.

    ``capacity`` is the size of the id space. Call :meth:`begin_round`
    before the first claim of each round and :meth:`finalize` after the
    last one.
    """

    def __init__(self, strategy="list-buffer", capacity=0, nthreads=1, block=64):
        if strategy not in STRATEGIES:
            raise ParameterError(f"unknown aggregation strategy {strategy!r}; pick one of {STRATEGIES}")
        if block < 1:
            raise ParameterError("buffer size must be >= 1")
        self.strategy = strategy
        self.capacity = int(capacity)
        self.nthreads = max(1, int(nthreads))
        self.block = int(block)
        code = STRATEGIES.index(strategy)
        self.meta = np.array([code, 0, self.block, 2], dtype=np.int64)
        self.cursor = np.zeros(1, dtype=np.int64)
        self.lb_pos = np.zeros(self.nthreads, dtype=np.int64)
        self.lb_end = np.zeros(self.nthreads, dtype=np.int64)
        if strategy == "hash":
            self.stamp = np.zeros(1, dtype=np.int64)
            self.U = np.zeros(1, dtype=np.int64)
        else:
            self.stamp = np.zeros(max(self.capacity, 1), dtype=np.int64)
            extra = (self.nthreads + 1) * self.block if strategy == "list-buffer" else 0
            self.U = np.empty(self.capacity + extra, dtype=np.int64)
        self.htab = np.full(2, -1, dtype=np.int64)
        self.blocks_reserved = 0

    def begin_round(self, round_no=None, bound=None):
        """Start a round. ``bound`` caps how many ids can be touched (sizes the hash set)."""
        self.meta[A_ROUND] = self.meta[A_ROUND] + 1 if round_no is None else int(round_no)
        self.cursor[0] = 0
        self.lb_pos[:] = 0
        self.lb_end[:] = 0
        if self.strategy == "hash":
            bound = self.capacity if bound is None else min(int(bound), self.capacity)
            cap = _next_pow2(max(2, 2 * bound))
            self.meta[A_HCAP] = cap
            self.htab = np.full(cap, -1, dtype=np.int64)

    def state(self):
        return (self.meta, self.stamp, self.U, self.cursor, self.lb_pos, self.lb_end, self.htab)

    def claim(self, idx, worker=0) -> bool:
        out = np.zeros(1, dtype=np.bool_)
        _claim_many(self.state(), np.array([idx], dtype=np.int64), int(worker), out)
        return bool(out[0])

    def claim_many(self, ids, worker=0) -> np.ndarray:
        ids = np.asarray(ids, dtype=np.int64)
        out = np.zeros(ids.shape[0], dtype=np.bool_)
        _claim_many(self.state(), ids, int(worker), out)
        return out

    def finalize(self) -> np.ndarray:
        """Touched ids of this round: no gaps, no duplicates."""
        if self.strategy == "hash":
            U = self.htab[self.htab >= 0].copy()
        elif self.strategy == "array":
            U = self.U[:self.cursor[0]].copy()
        else:
            filled = int(self.cursor[0])
            self.blocks_reserved = filled // self.block
            keep = np.ones(filled, dtype=bool)
            for w in range(self.nthreads):
                keep[self.lb_pos[w]:self.lb_end[w]] = False
            U = self.U[:filled][keep]
        self.cursor[0] = 0
        self.lb_pos[:] = 0
        self.lb_end[:] = 0
        return U

"""Bucketing structures for peeling: ids grouped by current integer value.

``OpenBuckets`` materializes a small window of the lowest buckets plus one
overflow bucket. ``DenseBuckets`` keeps one cell per possible value and finds
the next non-empty one by scanning regions of doubling width.

Both store stale entries lazily: an id is only taken from a bucket if its
current value still matches and it has not been extracted yet.
"""
from __future__ import annotations

import numpy as np

from .exceptions import BucketsExhausted, ContractViolation, ParameterError

WINDOW = 16


class _BucketBase:
    def __init__(self, values, ids=None):
        values = np.asarray(values, dtype=np.int64)
        if values.ndim != 1:
            raise ParameterError("bucket values must be one-dimensional")
        if values.size and values.min() < 0:
            raise ParameterError("bucket values must be non-negative")
        self.ids = np.arange(values.shape[0], dtype=np.int64) if ids is None else np.asarray(ids, np.int64)
        size = int(self.ids.max()) + 1 if self.ids.size else 0
        self.value = np.zeros(size, dtype=np.int64)
        self.value[self.ids] = values
        self.extracted = np.ones(size, dtype=bool)
        self.extracted[self.ids] = False
        self.remaining = int(self.ids.shape[0])
        self.k = 0
        self.history = []

    @property
    def current_level(self):
        return self.k

    def exhausted(self):
        return self.remaining == 0

    def _live(self, cand, v):
        cand = np.unique(cand)
        return cand[(~self.extracted[cand]) & (self.value[cand] == v)]

    def _take(self, v, ids):
        self.extracted[ids] = True
        self.remaining -= ids.shape[0]
        self.k = v
        self.history.append((v, int(ids.shape[0])))
        return v, ids

    def _check_update(self, ids, new_values):
        ids = np.asarray(ids, dtype=np.int64)
        new_values = np.asarray(new_values, dtype=np.int64)
        if ids.shape != new_values.shape:
            raise ParameterError("ids and values differ in length")
        if ids.size == 0:
            return ids, new_values, None
        if np.any(ids < 0) or np.any(ids >= self.extracted.shape[0]) or np.any(self.extracted[ids]):
            raise ContractViolation("update of an identifier that was already extracted")
        clamped = np.maximum(new_values, self.k)
        old = self.value[ids]
        self.value[ids] = clamped
        return ids, clamped, old


class OpenBuckets(_BucketBase):
    """Window of ``window`` materialized buckets plus an overflow bucket."""

    def __init__(self, values, ids=None, window=WINDOW):
        super().__init__(values, ids)
        self.window = int(window)
        self._fill(self.ids)

    def _fill(self, ids):
        live = ids[~self.extracted[ids]]
        self.base = int(self.value[live].min()) if live.size else 0
        self.buckets = [[] for _ in range(self.window)]
        self.overflow = []
        self.cursor = 0
        self._place(live, self.value[live])

    def _place(self, ids, vals):
        if ids.size == 0:
            return
        off = vals - self.base
        inside = off < self.window
        if not inside.all():
            self.overflow.append(ids[~inside])
            ids, off = ids[inside], off[inside]
        if ids.size <= 1:
            if ids.size:
                self.buckets[int(off[0])].append(ids)
            return
        order = np.argsort(off, kind="stable")
        ids, off = ids[order], off[order]
        cuts = np.flatnonzero(np.diff(off)) + 1
        for chunk, o in zip(np.split(ids, cuts), off[np.r_[0, cuts]]):
            self.buckets[int(o)].append(chunk)

    def next_bucket(self):
        while self.remaining > 0:
            while self.cursor < self.window:
                slot = self.buckets[self.cursor]
                if slot:
                    v = self.base + self.cursor
                    ids = self._live(np.concatenate(slot), v)
                    self.buckets[self.cursor] = []
                    if ids.size:
                        return self._take(v, ids)
                self.cursor += 1
            pending = np.concatenate(self.overflow) if self.overflow else np.zeros(0, np.int64)
            self._fill(np.unique(pending))
        raise BucketsExhausted("all identifiers extracted")

    def update(self, ids, new_values):
        ids, vals, _ = self._check_update(ids, new_values)
        if ids.size:
            self._place(ids, vals)


class DenseBuckets(_BucketBase):
    """One cell per value in ``0..max(values)`` with per-value live counts; grows on larger updates."""

    def __init__(self, values, ids=None):
        super().__init__(values, ids)
        top = int(self.value[self.ids].max()) + 1 if self.ids.size else 1
        self.live_count = np.zeros(top, dtype=np.int64)
        np.add.at(self.live_count, self.value[self.ids], 1)
        self.cells = [[] for _ in range(top)]
        self._place(self.ids, self.value[self.ids])

    def _place(self, ids, vals):
        if ids.size <= 1:
            if ids.size:
                self.cells[int(vals[0])].append(ids)
            return
        order = np.argsort(vals, kind="stable")
        ids, vals = ids[order], vals[order]
        cuts = np.flatnonzero(np.diff(vals)) + 1
        for chunk, v in zip(np.split(ids, cuts), vals[np.r_[0, cuts]]):
            self.cells[int(v)].append(chunk)

    def _find(self):
        """Smallest value >= k with live ids, scanning [k, k+1), [k+1, k+3), ..."""
        top = self.live_count.shape[0]
        lo, width = self.k, 1
        while lo < top:
            hi = min(top, lo + width)
            nz = np.flatnonzero(self.live_count[lo:hi])
            if nz.size:
                return lo + int(nz[0])
            lo, width = hi, width * 2
        return -1

    def next_bucket(self):
        if self.remaining == 0:
            raise BucketsExhausted("all identifiers extracted")
        v = self._find()
        if v < 0:
            raise BucketsExhausted("live counts empty")
        ids = self._live(np.concatenate(self.cells[v]), v)
        self.cells[v] = []
        self.live_count[v] -= ids.shape[0]
        return self._take(v, ids)

    def update(self, ids, new_values):
        ids, vals, old = self._check_update(ids, new_values)
        if ids.size:
            top = int(vals.max()) + 1
            if top > self.live_count.shape[0]:
                # values may rise above the initial maximum; grow to fit
                grow = top - self.live_count.shape[0]
                self.live_count = np.concatenate([self.live_count, np.zeros(grow, np.int64)])
                self.cells.extend([] for _ in range(grow))
            np.subtract.at(self.live_count, old, 1)
            np.add.at(self.live_count, vals, 1)
            self._place(ids, vals)


IMPLEMENTATIONS = {"open": OpenBuckets, "dense": DenseBuckets}


def init_buckets(values, impl="open", ids=None):
    if impl not in IMPLEMENTATIONS:
        raise ParameterError(f"unknown bucket implementation {impl!r}; pick 'open' or 'dense'")
    return IMPLEMENTATIONS[impl](values, ids)


def next_bucket(B):
    """``(k, ids)`` of the lowest non-empty bucket; raises BucketsExhausted at the end."""
    return B.next_bucket()


def update_buckets(B, updates):
    """Apply ``(id, new_value)`` pairs, or a pair of equal-length arrays."""
    if isinstance(updates, tuple) and len(updates) == 2 and isinstance(updates[0], np.ndarray):
        ids, vals = updates
    else:
        arr = np.asarray(list(updates), dtype=np.int64).reshape(-1, 2)
        ids, vals = arr[:, 0], arr[:, 1]
    B.update(ids, vals)

"""Table of per-clique counts keyed by r-cliques.

Layouts:

* one level: a single hash table keyed by the packed clique;
* two levels: a direct array over the first vertex pointing at one hash
  table per vertex keyed by the packed remainder;
* ``levels >= 3``: nested hash tables, one vertex per intermediate level,
  with the last level keyed by the packed remaining ``r - levels + 1`` vertices.

Cells are ``uint64``. A cell with the top bit set is empty (or is the barrier
placed after every table) and carries an up-pointer to the entry that owns
the table. A clique's index is its cell position in the concatenation of
last-level tables, barriers included, so indices are unique but not dense.
Vertices inside a key are ordered by vertex ID.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit
from numba.typed import List

from ._atomic import atomic_add, atomic_cas, atomic_counter
from ._parallel import chunk_size, run_workers
from .exceptions import CliqueNotFoundError, TableConfigError
from .graph import DirectedGraph, UndirectedGraph
from .listing import list_cliques

TOP = np.uint64(1) << np.uint64(63)
LOW = ~TOP
VERTEX_BYTES = 4
POINTER_BYTES = 8

# layout of the int64 meta vector carried in the kernel tuple
M_R, M_LEVELS, M_KV, M_BITS, M_SEED, M_N, M_DIRECT, M_CONTIG, M_TABLES = range(9)


@dataclass(frozen=True)
class TableConfig:
    levels: int = 2
    contiguous: bool = True
    inverse_map: str = "pointer"
    seed: int = 0x5EED

    def validate(self, r):
        if self.inverse_map not in ("binary", "pointer"):
            raise TableConfigError(f"inverse_map must be 'binary' or 'pointer', got {self.inverse_map!r}")
        if self.inverse_map == "pointer" and not self.contiguous:
            raise TableConfigError("stored-pointer inverse map needs contiguous last-level tables")
        levels = 1 if r == 1 else int(self.levels)
        if not 1 <= levels <= r:
            raise TableConfigError(f"levels must be in 1..{r}, got {self.levels}")
        return levels


# ------------------------------------------------------------------ kernels

@njit(nogil=True, cache=True)
def mix64(x):
    z = x + np.uint64(0x9E3779B97F4A7C15)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@njit(nogil=True, cache=True)
def _probe(cells, base, cap, key, seed):
    mask = cap - 1
    h = np.int64(mix64(key ^ seed) & np.uint64(mask))
    while True:
        c = cells[base + h]
        if c == key:
            return h
        if c & TOP:
            return -1
        h = (h + 1) & mask


@njit(nogil=True, cache=True)
def pack_key(verts, lo, hi, bits):
    key = np.uint64(0)
    b = np.uint64(bits)
    for i in range(lo, hi):
        key = (key << b) | np.uint64(verts[i])
    return key


@njit(nogil=True, cache=True)
def lookup(tt, verts):
    """Index of the clique whose ID-sorted vertices are ``verts``, or -1."""
    meta = tt[0]
    ikeys = tt[1]
    ichild = tt[2]
    itstart = tt[3]
    itcap = tt[4]
    lstart = tt[5]
    lcap = tt[6]
    tpart = tt[7]
    tbase = tt[8]
    parts = tt[9]
    r = meta[M_R]
    levels = meta[M_LEVELS]
    seed = np.uint64(meta[M_SEED])
    if meta[M_DIRECT] == 1:
        return verts[0]
    t = 0
    if levels == 2:
        v = verts[0]
        if ikeys[v] & TOP:
            return -1
        t = ichild[v]
    elif levels > 2:
        it = 0
        for j in range(levels - 1):
            slot = _probe(ikeys, itstart[it], itcap[it], np.uint64(verts[j]), seed)
            if slot < 0:
                return -1
            it = ichild[itstart[it] + slot]
        t = it
    key = pack_key(verts, levels - 1, r, meta[M_BITS])
    slot = _probe(parts[tpart[t]], tbase[t], lcap[t], key, seed)
    if slot < 0:
        return -1
    return lstart[t] + slot


@njit(nogil=True, cache=True)
def _decode(key, out, lo, hi, bits):
    mask = (np.uint64(1) << np.uint64(bits)) - np.uint64(1)
    for i in range(hi - 1, lo - 1, -1):
        out[i] = np.int64(key & mask)
        key = key >> np.uint64(bits)


@njit(nogil=True, cache=True)
def vertices_pointer(tt, idx, out):
    """Recover vertices by scanning to the next marked cell and following up-pointers."""
    meta = tt[0]
    ikeys = tt[1]
    cells = tt[9][0]
    levels = meta[M_LEVELS]
    r = meta[M_R]
    if idx < 0 or idx >= cells.shape[0]:
        return False
    key = cells[idx]
    if key & TOP:
        return False
    if meta[M_DIRECT] == 1:
        out[0] = np.int64(key)
        return True
    _decode(key, out, levels - 1, r, meta[M_BITS])
    if levels == 1:
        return True
    p = idx + 1
    while not cells[p] & TOP:
        p += 1
    up = np.int64(cells[p] & LOW)
    if levels == 2:
        out[0] = up
        return True
    for j in range(levels - 2, -1, -1):
        out[j] = np.int64(ikeys[up])
        if j == 0:
            break
        p = up + 1
        while not ikeys[p] & TOP:
            p += 1
        up = np.int64(ikeys[p] & LOW)
    return True


@njit(nogil=True, cache=True)
def vertices_binary(tt, idx, out):
    """Recover vertices by binary search over per-level prefix offsets."""
    meta = tt[0]
    lstart = tt[5]
    lcap = tt[6]
    tpart = tt[7]
    tbase = tt[8]
    parts = tt[9]
    bs_off = tt[10]
    bs_span = tt[11]
    bs_vert = tt[12]
    levels = meta[M_LEVELS]
    r = meta[M_R]
    if idx < 0 or idx >= lstart[lstart.shape[0] - 1]:
        return False
    t = np.searchsorted(lstart, idx, side="right") - 1
    slot = idx - lstart[t]
    if slot >= lcap[t]:
        return False
    key = parts[tpart[t]][tbase[t] + slot]
    if key & TOP:
        return False
    if meta[M_DIRECT] == 1:
        out[0] = np.int64(key)
        return True
    _decode(key, out, levels - 1, r, meta[M_BITS])
    for j in range(levels - 1):
        span = bs_span[bs_off[j]:bs_off[j + 1]]
        e = np.searchsorted(span, idx, side="right") - 1
        out[j] = bs_vert[bs_off[j] + e]
    return True


@njit(nogil=True, cache=True)
def _alloc_parts(caps, empties, contiguous):
    parts = List()
    if contiguous:
        total = 0
        for t in range(caps.shape[0]):
            total += caps[t] + 1
        block = np.empty(total, dtype=np.uint64)
        p = 0
        for t in range(caps.shape[0]):
            for i in range(caps[t] + 1):
                block[p] = empties[t]
                p += 1
        parts.append(block)
    else:
        for t in range(caps.shape[0]):
            parts.append(np.full(caps[t] + 1, empties[t], dtype=np.uint64))
    return parts


@njit(nogil=True, cache=True)
def _insert_worker(w, cursor, chunk, parts, tpart, tbase, tcap, tstart, empties,
                   item_table, item_key, seed, gpos):
    total = item_key.shape[0]
    while True:
        lo = atomic_add(cursor, 0, chunk)
        if lo >= total:
            break
        for i in range(lo, min(total, lo + chunk)):
            t = item_table[i]
            cells = parts[tpart[t]]
            base = tbase[t]
            mask = tcap[t] - 1
            key = item_key[i]
            h = np.int64(mix64(key ^ seed) & np.uint64(mask))
            while True:
                if atomic_cas(cells, base + h, empties[t], key):
                    gpos[i] = tstart[t] + h
                    break
                if cells[base + h] == key:
                    gpos[i] = -1
                    break
                h = (h + 1) & mask
    return 0


@njit(nogil=True, cache=True)
def _pack_rows(rows, lo, bits):
    out = np.empty(rows.shape[0], dtype=np.uint64)
    for i in range(rows.shape[0]):
        out[i] = pack_key(rows[i], lo, rows.shape[1], bits)
    return out


def _caps(occ):
    need = (3 * occ + 1) // 2
    cap = np.ones_like(occ)
    while np.any(cap < need):
        cap = np.where(cap < need, cap * 2, cap)
    return np.maximum(cap, 1)


def _insert(parts, tpart, tbase, tcap, tstart, empties, item_table, item_key, seed, nthreads):
    gpos = np.empty(item_key.shape[0], dtype=np.int64)
    run_workers(_insert_worker, nthreads, atomic_counter(), chunk_size(item_key.shape[0], nthreads, hi=4096),
                parts, tpart, tbase, tcap, tstart, empties, item_table, item_key, np.uint64(seed), gpos)
    if np.any(gpos < 0):
        raise TableConfigError("duplicate clique key during table build")
    return gpos


# ---------------------------------------------------------------- the table

class CliqueTable:
    """Counts per r-clique with index <-> vertices maps.

    Build with :func:`build_table`. ``counts`` is sized to ``index_space``;
    only occupied cells (see :meth:`valid_indices`) carry cliques.
    """

    def __init__(self, r, n, cfg, levels, tt, total_cliques, occ_per_level, cells_per_level):
        self.r = r
        self.n = n
        self.cfg = cfg
        self.levels = levels
        self.tt = tt
        self.total_cliques = int(total_cliques)
        self.prefix_sizes = tt[5]
        self.index_space = int(tt[5][-1])
        self.counts = np.zeros(self.index_space, dtype=np.int64)
        self._occ = occ_per_level
        self._cells = cells_per_level
        self._valid = None

    @property
    def kv(self):
        return int(self.tt[0][M_KV])

    def valid_indices(self) -> np.ndarray:
        if self._valid is None:
            parts = self.tt[9]
            lstart, lcap, tpart, tbase = self.tt[5], self.tt[6], self.tt[7], self.tt[8]
            if self.cfg.contiguous:
                occupied = (parts[0] & TOP) == 0
            else:
                occupied = np.concatenate([(parts[int(tpart[t])] & TOP) == 0 for t in range(lcap.shape[0])]
                                          + [np.zeros(0, np.bool_)])
            self._valid = np.flatnonzero(occupied).astype(np.int64)
        return self._valid

    def index_of(self, clique) -> int:
        verts = np.sort(np.asarray(clique, dtype=np.int64))
        if verts.shape[0] != self.r or verts.min(initial=0) < 0 or verts.max(initial=0) >= self.n:
            raise CliqueNotFoundError(tuple(int(v) for v in clique))
        idx = lookup(self.tt, verts)
        if idx < 0:
            raise CliqueNotFoundError(tuple(int(v) for v in clique))
        return int(idx)

    def vertices_of(self, idx, method=None) -> tuple:
        method = method or self.cfg.inverse_map
        if not 0 <= idx < self.index_space:
            raise IndexError(f"index {idx} outside 0..{self.index_space - 1}")
        out = np.empty(self.r, dtype=np.int64)
        if method == "pointer":
            if not self.cfg.contiguous:
                raise TableConfigError("stored-pointer inverse map needs contiguous last-level tables")
            ok = vertices_pointer(self.tt, int(idx), out)
        elif method == "binary":
            ok = vertices_binary(self.tt, int(idx), out)
        else:
            raise TableConfigError(f"unknown inverse map {method!r}")
        if not ok:
            raise CliqueNotFoundError(f"no clique stored at index {idx}")
        return tuple(int(v) for v in out)

    def add_count(self, idx, delta):
        atomic_add_count(self.counts, int(idx), int(delta))

    def get_count(self, idx) -> int:
        if not 0 <= idx < self.index_space:
            raise IndexError(f"index {idx} outside 0..{self.index_space - 1}")
        return int(self.counts[idx])

    def memory_units(self) -> int:
        """Abstract key memory: one unit per stored vertex or pointer, occupied entries only."""
        r, lv = self.r, self.levels
        occ = self._occ
        if lv == 1:
            return self.total_cliques * r
        if lv == 2:
            return self.n + self.total_cliques * (r - 1)
        kv = r - lv + 1
        inter = 2 * sum(occ[:-1])
        last = self.total_cliques * (kv + (1 if kv == 1 else 0))
        return int(inter + last)

    @property
    def key_memory_bytes(self) -> int:
        """Byte accounting over allocated cells (empty cells and barriers included)."""
        lv, kv = self.levels, self.kv
        cells = self._cells
        total = 0
        if lv == 2:
            total += cells[0] * POINTER_BYTES
        elif lv >= 3:
            total += sum(cells[:-1]) * (VERTEX_BYTES + POINTER_BYTES)
        per_last = kv * VERTEX_BYTES + (POINTER_BYTES if lv >= 3 and kv == 1 else 0)
        total += cells[-1] * per_last
        return int(total)

    def memory_report(self) -> dict:
        return {
            "levels": self.levels,
            "key_memory_bytes": self.key_memory_bytes,
            "key_memory_units": self.memory_units(),
            "entries_per_level": [int(x) for x in self._occ],
            "slots_per_level": [int(x) for x in self._cells],
            "total_cliques": self.total_cliques,
            "index_space": self.index_space,
        }


@njit(nogil=True, cache=True)
def atomic_add_count(counts, idx, delta):
    atomic_add(counts, idx, delta)


def build_table(G: UndirectedGraph, DG: DirectedGraph, r, cfg: TableConfig | None = None,
                nthreads=1, cliques=None) -> CliqueTable:
    """Build the table of ``r``-cliques of ``G`` (listed over ``DG``), counts zeroed.

    ``cliques`` may pass pre-listed cliques (rows in any vertex order).
    """
    cfg = cfg or TableConfig()
    if r < 1:
        raise TableConfigError("r must be >= 1")
    levels = cfg.validate(r)
    n = G.n
    bits = max(1, int(n - 1).bit_length()) if n > 1 else 1
    kv = r - levels + 1
    if r > 1 and kv * bits > 63:
        raise TableConfigError(
            f"{kv} vertex IDs of {bits} bits do not fit a 63-bit key; use more levels (at least "
            f"{r - 63 // bits + 1})")
    seed = np.uint64(cfg.seed & ((1 << 63) - 1))

    if r == 1:
        rows = np.arange(n, dtype=np.int64).reshape(-1, 1)
    else:
        rows = cliques if cliques is not None else list_cliques(DG, r, nthreads)
        rows = np.sort(np.asarray(rows, dtype=np.int64).reshape(-1, r), axis=1)
    N = rows.shape[0]

    if r == 1:
        # direct addressing: index = vertex id
        meta = np.array([1, 1, 1, bits, int(seed), n, 1, int(cfg.contiguous), 1], dtype=np.int64)
        empties = np.full(1, TOP, dtype=np.uint64)
        parts = _alloc_parts(np.array([n], np.int64), empties, cfg.contiguous)
        parts[0][:n] = np.arange(n, dtype=np.uint64)
        z = np.zeros(0, dtype=np.int64)
        tt = (meta, np.zeros(0, np.uint64), z, z, z, np.array([0, n + 1], np.int64),
              np.array([n], np.int64), np.zeros(1, np.int64), np.zeros(1, np.int64), parts,
              np.zeros(1, np.int64), z, z)
        return CliqueTable(1, n, cfg, 1, tt, n, [n], [n + 1])

    rows = rows[np.lexsort(rows.T[::-1])]
    # first column where each row differs from the previous one
    diff = np.ones_like(rows, dtype=bool)
    diff[1:] = rows[1:] != rows[:-1]
    first_diff = np.argmax(diff, axis=1)
    first_diff[:1] = 0

    # entry ids per prefix length p = 1..levels-1
    new = [None] + [first_diff < p for p in range(1, levels)]
    eid = [None] + [np.cumsum(new[p]) - 1 for p in range(1, levels)]

    # intermediate levels
    it_start_l, it_cap_l, occ_l, cells_l = [], [], [], []
    ikeys = np.zeros(0, np.uint64)
    ichild = np.zeros(0, np.int64)
    entry_cell = []   # per level, global cell of each entry
    if levels == 2:
        ikeys = np.full(n, TOP, dtype=np.uint64)
        ichild = np.full(n, -1, dtype=np.int64)
        sel = new[1]
        v = rows[sel, 0]
        ikeys[v] = v.astype(np.uint64)
        ichild[v] = eid[1][sel]
        entry_cell.append(v)
        occ_l.append(int(sel.sum()))
        cells_l.append(n)
        itstart = np.zeros(1, np.int64)
        itcap = np.array([n], np.int64)
    elif levels > 2:
        # size all intermediate tables first so cells can be laid out in one block
        tab_occ = []
        for p in range(1, levels):
            sel = new[p]
            owner = np.zeros(int(sel.sum()), np.int64) if p == 1 else eid[p - 1][sel]
            ntab = 1 if p == 1 else int(new[p - 1].sum())
            tab_occ.append(np.bincount(owner, minlength=ntab))
        caps = [_caps(o) for o in tab_occ]
        lvl_tab_off = np.zeros(levels, np.int64)
        np.cumsum([c.shape[0] for c in caps], out=lvl_tab_off[1:])
        itcap = np.concatenate(caps).astype(np.int64)
        itstart = np.zeros(itcap.shape[0], np.int64)
        np.cumsum(itcap[:-1] + 1, out=itstart[1:])
        total_cells = int(itstart[-1] + itcap[-1] + 1)
        ikeys = np.empty(total_cells, np.uint64)
        ichild = np.full(total_cells, -1, np.int64)
        iparts = List([ikeys])
        up_of_table = np.zeros(itcap.shape[0], np.int64)
        for p in range(1, levels):
            j = p - 1
            sel = new[p]
            tabs = slice(lvl_tab_off[j], lvl_tab_off[j + 1])
            if j > 0:
                up_of_table[tabs] = entry_cell[j - 1]
            empties = TOP | up_of_table.astype(np.uint64)
            for t in range(lvl_tab_off[j], lvl_tab_off[j + 1]):
                ikeys[itstart[t]:itstart[t] + itcap[t] + 1] = empties[t]
            owner = (np.zeros(int(sel.sum()), np.int64) if p == 1 else eid[p - 1][sel]) + lvl_tab_off[j]
            keys = rows[sel, p - 1].astype(np.uint64)
            gpos = _insert(iparts, np.zeros(itcap.shape[0], np.int64), itstart, itcap, itstart, empties,
                           owner, keys, seed, nthreads)
            child = eid[p][sel] + (lvl_tab_off[j + 1] if p < levels - 1 else 0)
            ichild[gpos] = child
            entry_cell.append(gpos)
            occ_l.append(int(sel.sum()))
            cells_l.append(int(sum(int(c) + 1 for c in caps[j])))
    else:
        itstart = np.zeros(0, np.int64)
        itcap = np.zeros(0, np.int64)

    # last level
    if levels == 1:
        owner = np.zeros(N, np.int64)
        ntab = 1
        up = np.zeros(1, np.int64)
    else:
        owner = eid[levels - 1]
        ntab = int(new[levels - 1].sum())
        up = np.asarray(entry_cell[levels - 2], dtype=np.int64)
    lcap = _caps(np.bincount(owner, minlength=ntab)).astype(np.int64)
    lstart = np.zeros(ntab + 1, np.int64)
    np.cumsum(lcap + 1, out=lstart[1:])
    empties = TOP | up.astype(np.uint64)
    parts = _alloc_parts(lcap, empties, cfg.contiguous)
    if cfg.contiguous:
        tpart = np.zeros(ntab, np.int64)
        tbase = lstart[:-1].copy()
    else:
        tpart = np.arange(ntab, dtype=np.int64)
        tbase = np.zeros(ntab, np.int64)
    keys = _pack_rows(rows, levels - 1, bits)
    _insert(parts, tpart, tbase, lcap, lstart[:-1], empties, owner, keys, seed, nthreads)
    occ_l.append(N)
    cells_l.append(int(lstart[-1]))

    # binary-search inverse: first last-level index under each intermediate entry
    bs_off = np.zeros(levels, np.int64)
    spans, verts = [], []
    for p in range(1, levels):
        sel = new[p]
        spans.append(lstart[eid[levels - 1][sel]])
        verts.append(rows[sel, p - 1])
        bs_off[p] = bs_off[p - 1] + int(sel.sum())
    bs_span = np.concatenate(spans).astype(np.int64) if spans else np.zeros(0, np.int64)
    bs_vert = np.concatenate(verts).astype(np.int64) if verts else np.zeros(0, np.int64)

    meta = np.array([r, levels, kv, bits, int(seed), n, 0, int(cfg.contiguous), ntab], dtype=np.int64)
    tt = (meta, ikeys, ichild, itstart, itcap, lstart, lcap, tpart, tbase, parts, bs_off, bs_span, bs_vert)
    return CliqueTable(r, n, cfg, levels, tt, N, occ_l, cells_l)

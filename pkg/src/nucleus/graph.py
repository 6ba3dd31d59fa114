"""Graph ingestion, CSR storage, orientation and relabeling."""
from __future__ import annotations

import io
import os
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .exceptions import GraphParseError, ParameterError

BINARY_MAGIC = b"NUCGRAPH1\n"


@dataclass(eq=False)
class UndirectedGraph:
    """Simple undirected graph in CSR form.

    Each edge is stored in both endpoint lists; lists are strictly increasing.
    ``labels`` optionally keeps the external vertex IDs (e.g. from a SNAP file).
    """

    n: int
    offsets: np.ndarray
    neighbors: np.ndarray
    labels: np.ndarray | None = field(default=None, repr=False)

    @property
    def m(self) -> int:
        return int(self.neighbors.shape[0] // 2)

    @classmethod
    def from_edges(cls, edges, n=None, labels=None) -> "UndirectedGraph":
        """Build from an iterable of (u, v) pairs; drops loops and duplicates."""
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if e.size and e.min() < 0:
            raise ParameterError("vertex IDs must be non-negative")
        if n is None:
            n = int(e.max()) + 1 if e.size else 0
        elif e.size and e.max() >= n:
            raise ParameterError(f"edge endpoint {int(e.max())} out of range for n={n}")
        e = e[e[:, 0] != e[:, 1]]
        both = np.concatenate([e, e[:, ::-1]])
        keys = np.unique(both[:, 0] * max(n, 1) + both[:, 1])
        src = keys // max(n, 1)
        dst = keys % max(n, 1)
        offsets = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=offsets[1:])
        return cls(int(n), offsets, dst.astype(np.int64), labels)

    def degrees(self) -> np.ndarray:
        return np.diff(self.offsets)

    def adjacency(self, v) -> np.ndarray:
        return self.neighbors[self.offsets[v]:self.offsets[v + 1]]

    def edges(self) -> np.ndarray:
        """Each undirected edge once, as rows (u, v) with u < v."""
        src = np.repeat(np.arange(self.n, dtype=np.int64), self.degrees())
        keep = src < self.neighbors
        return np.stack([src[keep], self.neighbors[keep]], axis=1)

    def validate(self):
        if self.offsets.shape[0] != self.n + 1 or self.offsets[-1] != self.neighbors.shape[0]:
            raise ParameterError("offsets do not match neighbor array")
        if self.neighbors.shape[0] % 2:
            raise ParameterError("odd number of adjacency entries")
        src = np.repeat(np.arange(self.n, dtype=np.int64), self.degrees())
        if np.any(src == self.neighbors):
            raise ParameterError("self-loop present")
        same_list = src[1:] == src[:-1]
        if np.any(self.neighbors[1:][same_list] <= self.neighbors[:-1][same_list]):
            raise ParameterError("adjacency list not strictly increasing")
        fwd = np.sort(src * max(self.n, 1) + self.neighbors)
        rev = np.sort(self.neighbors * max(self.n, 1) + src)
        if not np.array_equal(fwd, rev):
            raise ParameterError("adjacency is not symmetric")
        return self

    def same_structure(self, other) -> bool:
        return (self.n == other.n and np.array_equal(self.offsets, other.offsets)
                and np.array_equal(self.neighbors, other.neighbors))

    def to_text(self) -> str:
        """SNAP-style edge list using dense IDs (or ``labels`` when present)."""
        e = self.edges()
        if self.labels is not None:
            e = self.labels[e]
        buf = io.StringIO()
        np.savetxt(buf, e, fmt="%d", delimiter=" ")
        return buf.getvalue()


@dataclass(eq=False)
class Ordering:
    """Total vertex order: ``position[v]`` is the rank of ``v``."""

    position: np.ndarray
    degeneracy: int = -1

    @property
    def order(self) -> np.ndarray:
        inv = np.empty_like(self.position)
        inv[self.position] = np.arange(self.position.shape[0], dtype=self.position.dtype)
        return inv

    def is_identity(self) -> bool:
        return bool(np.array_equal(self.position, np.arange(self.position.shape[0])))


@dataclass(eq=False)
class DirectedGraph:
    """Acyclic orientation: edges point from lower to higher rank.

    Out-lists are sorted by rank, which is the order clique listing extends in.
    """

    rank: np.ndarray
    out_offsets: np.ndarray
    out_neighbors: np.ndarray
    max_out_degree: int

    @property
    def n(self) -> int:
        return int(self.rank.shape[0])

    def out(self, v) -> np.ndarray:
        return self.out_neighbors[self.out_offsets[v]:self.out_offsets[v + 1]]

    def out_degrees(self) -> np.ndarray:
        return np.diff(self.out_offsets)


# --------------------------------------------------------------------- parsing

def parse_edge_list(text) -> UndirectedGraph:
    """Parse a SNAP edge list into a graph with densified vertex IDs.

    Dense IDs follow first appearance in the file. ``text`` may be a string,
    bytes or a readable file object.
    """
    if hasattr(text, "read"):
        text = text.read()
    if isinstance(text, bytes):
        text = text.decode()
    flat = []
    for lineno, line in enumerate(text.splitlines(), 1):
        parts = line.split()
        if not parts or parts[0].startswith("#"):
            continue
        if len(parts) != 2:
            raise GraphParseError(f"expected 2 fields, got {len(parts)}", lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphParseError(f"non-integer vertex ID in {line.strip()!r}", lineno) from None
        if u < 0 or v < 0:
            raise GraphParseError("negative vertex ID", lineno)
        flat.append(u)
        flat.append(v)
    raw = np.asarray(flat, dtype=np.int64)
    if raw.size == 0:
        return UndirectedGraph(0, np.zeros(1, np.int64), np.zeros(0, np.int64), np.zeros(0, np.int64))
    uniq, first = np.unique(raw, return_index=True)
    appearance = np.argsort(first, kind="stable")
    labels = uniq[appearance]
    new_id = np.empty(uniq.shape[0], dtype=np.int64)
    new_id[appearance] = np.arange(uniq.shape[0])
    dense = new_id[np.searchsorted(uniq, raw)]
    return UndirectedGraph.from_edges(dense.reshape(-1, 2), n=uniq.shape[0], labels=labels)


def read_edge_list(path) -> UndirectedGraph:
    with open(path, "rb") as fh:
        head = fh.read(len(BINARY_MAGIC))
    if head == BINARY_MAGIC:
        return load_binary(path)
    with open(path, encoding="utf-8") as fh:
        return parse_edge_list(fh)


def write_edge_list(G: UndirectedGraph, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(G.to_text())


def save_binary(G: UndirectedGraph, path):
    labels = G.labels if G.labels is not None else np.arange(G.n, dtype=np.int64)
    with open(path, "wb") as fh:
        fh.write(BINARY_MAGIC)
        fh.write(np.array([G.n, G.neighbors.shape[0]], dtype="<i8").tobytes())
        fh.write(G.offsets.astype("<i8").tobytes())
        fh.write(G.neighbors.astype("<i8").tobytes())
        fh.write(labels.astype("<i8").tobytes())


def load_binary(path) -> UndirectedGraph:
    with open(path, "rb") as fh:
        if fh.read(len(BINARY_MAGIC)) != BINARY_MAGIC:
            raise GraphParseError("not a NUCGRAPH1 file")
        n, nnz = np.frombuffer(fh.read(16), dtype="<i8")
        offsets = np.frombuffer(fh.read(8 * (n + 1)), dtype="<i8").astype(np.int64)
        neighbors = np.frombuffer(fh.read(8 * nnz), dtype="<i8").astype(np.int64)
        labels = np.frombuffer(fh.read(8 * n), dtype="<i8").astype(np.int64)
    return UndirectedGraph(int(n), offsets, neighbors, labels)


# ------------------------------------------------------------------ generation

def generate_rmat(scale, edge_factor=16, a=0.5, b=0.1, c=0.1, d=0.3, seed=0) -> UndirectedGraph:
    """Recursive-matrix random graph on ``2**scale`` vertices.

    Samples ``edge_factor * 2**scale`` directed pairs, then symmetrizes and
    drops duplicates and self-loops.
    """
    if abs(a + b + c + d - 1.0) > 1e-9:
        raise ParameterError(f"rMAT probabilities sum to {a + b + c + d}, expected 1")
    if min(a, b, c, d) < 0:
        raise ParameterError("rMAT probabilities must be non-negative")
    if scale < 1:
        raise ParameterError("scale must be >= 1")
    if edge_factor < 0:
        raise ParameterError("edge_factor must be >= 0")
    rng = np.random.default_rng(seed)
    n = 1 << int(scale)
    count = int(edge_factor) * n
    src = np.zeros(count, dtype=np.int64)
    dst = np.zeros(count, dtype=np.int64)
    for _ in range(int(scale)):
        x = rng.random(count)
        row = x >= a + b
        col = ((x >= a) & (x < a + b)) | (x >= a + b + c)
        src = (src << 1) | row
        dst = (dst << 1) | col
    return UndirectedGraph.from_edges(np.stack([src, dst], axis=1), n=n)


def generate_gnp(n, p, seed=0) -> UndirectedGraph:
    """Erdos-Renyi graph: each of the ``n*(n-1)/2`` pairs kept with probability ``p``."""
    if not 0.0 <= p <= 1.0:
        raise ParameterError("edge probability must be in [0, 1]")
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(int(n), 1)
    keep = rng.random(iu.shape[0]) < p
    return UndirectedGraph.from_edges(np.stack([iu[keep], ju[keep]], axis=1), n=int(n))


# ------------------------------------------------------------------- orderings

@njit(cache=True)
def _degeneracy_peel(offsets, neighbors, n):
    """Bucket-queue min-degree peeling in O(n + m); returns (position, degeneracy)."""
    deg = (offsets[1:] - offsets[:-1]).copy()
    md = 0
    for v in range(n):
        if deg[v] > md:
            md = deg[v]
    # vertices sorted by degree, with bin starts and each vertex's slot
    bin_start = np.zeros(md + 2, dtype=np.int64)
    for v in range(n):
        bin_start[deg[v] + 1] += 1
    for d in range(md + 1):
        bin_start[d + 1] += bin_start[d]
    vert = np.empty(n, dtype=np.int64)
    slot = np.empty(n, dtype=np.int64)
    fill = bin_start.copy()
    for v in range(n):
        slot[v] = fill[deg[v]]
        vert[slot[v]] = v
        fill[deg[v]] += 1
    position = np.empty(n, dtype=np.int64)
    degeneracy = 0
    for i in range(n):
        v = vert[i]
        position[v] = i
        if deg[v] > degeneracy:
            degeneracy = deg[v]
        for j in range(offsets[v], offsets[v + 1]):
            w = neighbors[j]
            if deg[w] > deg[v]:
                # swap w with the first vertex of its bin, then shrink that bin
                dw = deg[w]
                first = bin_start[dw]
                u = vert[first]
                if u != w:
                    vert[slot[w]] = u
                    slot[u] = slot[w]
                    vert[first] = w
                    slot[w] = first
                bin_start[dw] += 1
                deg[w] -= 1
    return position, degeneracy


def degeneracy_order(G: UndirectedGraph) -> Ordering:
    """Min-degree peeling order and the degeneracy."""
    if G.n == 0:
        return Ordering(np.zeros(0, np.int64), 0)
    position, degen = _degeneracy_peel(G.offsets, G.neighbors, G.n)
    return Ordering(position, int(degen))


def degree_order(G: UndirectedGraph) -> Ordering:
    """Static order by (degree, ID); cheaper but only bounds out-degree by max degree."""
    order = np.lexsort((np.arange(G.n), G.degrees()))
    position = np.empty(G.n, dtype=np.int64)
    position[order] = np.arange(G.n)
    dg = orient(G, Ordering(position))
    return Ordering(position, dg.max_out_degree)


def identity_order(n) -> Ordering:
    return Ordering(np.arange(n, dtype=np.int64))


def make_ordering(G: UndirectedGraph, method: str) -> Ordering:
    if method == "degeneracy":
        return degeneracy_order(G)
    if method == "degree":
        return degree_order(G)
    if method == "identity":
        return identity_order(G.n)
    raise ParameterError(f"unknown orientation {method!r}")


def _check_ordering(G, ordering):
    pos = np.asarray(ordering.position)
    if pos.shape[0] != G.n or not np.array_equal(np.sort(pos), np.arange(G.n)):
        raise ParameterError("ordering is not a permutation of the vertices")
    return pos


def orient(G: UndirectedGraph, ordering: Ordering) -> DirectedGraph:
    pos = _check_ordering(G, ordering)
    src = np.repeat(np.arange(G.n, dtype=np.int64), G.degrees())
    dst = G.neighbors
    keep = pos[src] < pos[dst]
    src, dst = src[keep], dst[keep]
    by = np.lexsort((pos[dst], src))
    src, dst = src[by], dst[by]
    out_deg = np.bincount(src, minlength=G.n)
    out_offsets = np.zeros(G.n + 1, dtype=np.int64)
    np.cumsum(out_deg, out=out_offsets[1:])
    max_out = int(out_deg.max()) if G.n else 0
    return DirectedGraph(pos.astype(np.int64), out_offsets, dst.astype(np.int64), max_out)


def relabel(G: UndirectedGraph, ordering: Ordering) -> UndirectedGraph:
    """Rename vertex ``v`` to ``position[v]``."""
    pos = _check_ordering(G, ordering)
    e = G.edges()
    labels = G.labels if G.labels is not None else np.arange(G.n, dtype=np.int64)
    new_labels = np.empty_like(labels)
    new_labels[pos] = labels
    return UndirectedGraph.from_edges(pos[e], n=G.n, labels=new_labels)


# ----------------------------------------------------------------- contraction

@njit(nogil=True, cache=True)
def _filter_lists(offsets, neighbors, lengths, alive_slot, loss, fraction):
    """Compact the lists of vertices that lost at least ``fraction`` of entries.

    Works in place on ``neighbors``/``lengths``; returns the number of lists rebuilt.
    """
    n = lengths.shape[0]
    rebuilt = 0
    for v in range(n):
        ln = lengths[v]
        if loss[v] == 0 or loss[v] < fraction * ln:
            continue
        base = offsets[v]
        k = 0
        for j in range(base, base + ln):
            if alive_slot[j]:
                neighbors[base + k] = neighbors[j]
                alive_slot[base + k] = True
                k += 1
        lengths[v] = k
        loss[v] = 0
        rebuilt += 1
    return rebuilt


def contract(G: UndirectedGraph, alive_edge, per_vertex_loss, fraction=0.25) -> UndirectedGraph:
    """Drop dead edges from the lists of vertices that lost enough neighbors.

    ``alive_edge`` is either a callable ``(u, v) -> bool`` or a boolean mask
    aligned with ``G.neighbors``. Lists of vertices whose loss is below
    ``fraction`` of their length are returned untouched, so the result may
    still mention dead edges from one side only.
    """
    src = np.repeat(np.arange(G.n, dtype=np.int64), G.degrees())
    if callable(alive_edge):
        alive = np.fromiter((bool(alive_edge(int(u), int(v))) for u, v in zip(src, G.neighbors)),
                            dtype=np.bool_, count=src.shape[0])
    else:
        alive = np.asarray(alive_edge, dtype=np.bool_).copy()
    loss = np.asarray(per_vertex_loss, dtype=np.int64).copy()
    nbrs = G.neighbors.copy()
    lengths = G.degrees().copy()
    _filter_lists(G.offsets, nbrs, lengths, alive, loss, float(fraction))
    offsets = np.zeros(G.n + 1, dtype=np.int64)
    np.cumsum(lengths, out=offsets[1:])
    keep = np.arange(nbrs.shape[0]) - np.repeat(G.offsets[:-1], G.degrees()) < np.repeat(lengths, G.degrees())
    return UndirectedGraph(G.n, offsets, nbrs[keep], G.labels)


def cpu_count() -> int:
    return os.cpu_count() or 1

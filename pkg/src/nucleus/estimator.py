"""scikit-learn style front end."""
from __future__ import annotations

import numpy as np
from scipy import sparse
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import CliqueNotFoundError, ParameterError
from .graph import UndirectedGraph
from .peeling import PeelConfig, nucleus_decomposition


def check_graph(X) -> UndirectedGraph:
    """Coerce ``X`` into an :class:`UndirectedGraph`.

    Accepts a graph, a ``(k, 2)`` integer edge array, or a square sparse
    adjacency matrix (nonzeros are edges, the diagonal is ignored).
    """
    if isinstance(X, UndirectedGraph):
        return X.validate()
    if sparse.issparse(X):
        if X.shape[0] != X.shape[1]:
            raise ParameterError(f"adjacency matrix must be square, got {X.shape}")
        coo = sparse.coo_matrix(X)
        return UndirectedGraph.from_edges(np.stack([coo.row, coo.col], axis=1), n=X.shape[0])
    edges = check_array(X, dtype=np.int64, ensure_min_samples=0)
    if edges.shape[1] != 2:
        raise ParameterError(f"edge array must have two columns, got {edges.shape[1]}")
    return UndirectedGraph.from_edges(edges)


class NucleusDecomposition(BaseEstimator, TransformerMixin):
    """Core numbers of r-cliques with respect to s-cliques.

    ``fit(G)`` decomposes a graph. ``transform(cliques)`` looks up the core
    number of each row of an ``(k, r)`` vertex array; ``fit_transform(G)``
    returns the cores aligned with ``cliques_``.

    Parameters left at ``None`` take the defaults tuned per ``(r, s)``.
    """

    def __init__(self, r=3, s=4, levels=2, contiguous=True, inverse_map="pointer", relabel=None,
                 aggregation=None, buffer_size=64, contract=None, bucket="open",
                 orientation="degeneracy", n_jobs=1):
        self.r = r
        self.s = s
        self.levels = levels
        self.contiguous = contiguous
        self.inverse_map = inverse_map
        self.relabel = relabel
        self.aggregation = aggregation
        self.buffer_size = buffer_size
        self.contract = contract
        self.bucket = bucket
        self.orientation = orientation
        self.n_jobs = n_jobs

    def _config(self):
        return PeelConfig(levels=self.levels, contiguous=self.contiguous, inverse_map=self.inverse_map,
                          relabel=self.relabel, aggregation=self.aggregation,
                          buffer_size=self.buffer_size, contract=self.contract, bucket=self.bucket,
                          orientation=self.orientation, threads=self.n_jobs)

    def fit(self, X, y=None):
        G = check_graph(X)
        res = nucleus_decomposition(G, int(self.r), int(self.s), self._config())
        self.result_ = res
        self.cliques_ = res.cliques
        self.core_ = res.cores
        self.rho_ = res.rho
        self.max_core_ = res.max_core
        self.n_vertices_ = G.n
        self._lookup = res.as_dict()
        return self

    def transform(self, X):
        check_is_fitted(self, "core_")
        rows = check_array(X, dtype=np.int64, ensure_min_samples=0)
        if rows.shape[1] != self.r:
            raise ParameterError(f"expected {self.r} vertices per row, got {rows.shape[1]}")
        out = np.empty(rows.shape[0], dtype=np.int64)
        for i, row in enumerate(np.sort(rows, axis=1)):
            key = tuple(int(v) for v in row)
            if key not in self._lookup:
                raise CliqueNotFoundError(key)
            out[i] = self._lookup[key]
        return out

    def fit_transform(self, X, y=None, **fit_params):
        return self.fit(X).core_

"""Compact graph containers backed by numpy edge arrays.

``CitationGraph`` stores the directed citation structure plus per-node
keyword incidence. Community detection and the local topology measurements
run on the undirected simplification (``UndirectedGraph``), in which mutual
citations collapse to a single edge.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components


def _dedup_edges(src: np.ndarray, dst: np.ndarray, n: int):
    """Drop self-loops and parallel edges from an edge list."""
    keep = src != dst
    keys = src[keep].astype(np.int64) * n + dst[keep].astype(np.int64)
    keys = np.unique(keys)
    return keys // n, keys % n


def _component_labels(n: int, src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """Weakly-connected component label per node."""
    data = np.ones(len(src), dtype=np.int8)
    mat = coo_matrix((data, (src, dst)), shape=(n, n))
    _, labels = connected_components(mat, directed=True, connection="weak")
    return labels


def _pick_component(labels: np.ndarray, node_ids: Sequence) -> int:
    """Label of the largest component; ties go to the component whose
    sorted node-id set is lexicographically smallest (decided by its
    minimum id, since components are disjoint)."""
    sizes = np.bincount(labels)
    best_size = sizes.max()
    candidates = set(np.flatnonzero(sizes == best_size).tolist())
    if len(candidates) == 1:
        return candidates.pop()
    best_label, best_id = -1, None
    for idx, lab in enumerate(labels.tolist()):
        if lab in candidates:
            nid = node_ids[idx]
            if best_id is None or nid < best_id:
                best_id, best_label = nid, lab
    return best_label


def _csr_from_arcs(n: int, src: np.ndarray, dst: np.ndarray):
    """CSR (indptr, indices) from directed arcs, rows sorted by column."""
    order = np.lexsort((dst, src))
    indices = dst[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
    return indptr, indices


class UndirectedGraph:
    """Simple undirected graph: unique edges stored once with ``u < v``."""

    def __init__(self, n: int, u: np.ndarray, v: np.ndarray,
                 node_ids: Optional[Sequence] = None):
        self.n = int(n)
        self.u = np.asarray(u, dtype=np.int64)
        self.v = np.asarray(v, dtype=np.int64)
        if node_ids is None:
            node_ids = np.arange(self.n)
        if len(node_ids) != self.n:
            raise ValueError("node_ids length does not match node count")
        self.node_ids = node_ids
        self._csr = None
        self._degree = None

    @property
    def edge_count(self) -> int:
        return len(self.u)

    def degree(self) -> np.ndarray:
        if self._degree is None:
            deg = np.bincount(self.u, minlength=self.n)
            deg += np.bincount(self.v, minlength=self.n)
            self._degree = deg.astype(np.int64)
        return self._degree

    def csr(self):
        """Symmetric CSR adjacency (indptr, indices), neighbors sorted."""
        if self._csr is None:
            src = np.concatenate([self.u, self.v])
            dst = np.concatenate([self.v, self.u])
            self._csr = _csr_from_arcs(self.n, src, dst)
        return self._csr

    def undirected(self) -> "UndirectedGraph":
        return self

    def subgraph(self, keep: np.ndarray) -> "UndirectedGraph":
        """Node-induced subgraph; ``keep`` is a boolean mask over nodes.

        Original node ids are preserved so partitions of the subgraph stay
        comparable with partitions of the parent graph.
        """
        keep = np.asarray(keep, dtype=bool)
        new_index = np.cumsum(keep) - 1
        emask = keep[self.u] & keep[self.v]
        ids = [nid for nid, k in zip(self.node_ids, keep.tolist()) if k]
        return UndirectedGraph(int(keep.sum()), new_index[self.u[emask]],
                               new_index[self.v[emask]], node_ids=ids)

    def largest_component(self) -> "UndirectedGraph":
        labels = _component_labels(self.n, self.u, self.v)
        winner = _pick_component(labels, self.node_ids)
        return self.subgraph(labels == winner)


class CitationGraph:
    """Directed citation graph over retained documents.

    Edges are simple (no self-citations, no parallel edges) and every
    endpoint is a retained document. ``incidence`` records, per node, the
    set of keyword indices the document matched.
    """

    def __init__(self, node_ids: Sequence[str], src: np.ndarray,
                 dst: np.ndarray, incidence: Optional[Sequence[frozenset]] = None):
        self.node_ids = node_ids
        self.src = np.asarray(src, dtype=np.int64)
        self.dst = np.asarray(dst, dtype=np.int64)
        self.incidence = incidence
        if incidence is not None and len(incidence) != len(node_ids):
            raise ValueError("incidence length does not match node count")
        self._und = None
        self._out_csr = None
        self._in_csr = None

    @property
    def n(self) -> int:
        return len(self.node_ids)

    @property
    def edge_count(self) -> int:
        return len(self.src)

    def out_csr(self):
        if self._out_csr is None:
            self._out_csr = _csr_from_arcs(self.n, self.src, self.dst)
        return self._out_csr

    def in_csr(self):
        if self._in_csr is None:
            self._in_csr = _csr_from_arcs(self.n, self.dst, self.src)
        return self._in_csr

    def undirected(self) -> UndirectedGraph:
        """Undirected simplification: mutual citations collapse to one edge."""
        if self._und is None:
            lo = np.minimum(self.src, self.dst)
            hi = np.maximum(self.src, self.dst)
            keys = np.unique(lo * self.n + hi)
            self._und = UndirectedGraph(self.n, keys // self.n, keys % self.n,
                                        node_ids=self.node_ids)
        return self._und

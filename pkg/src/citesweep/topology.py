"""Local topology measurements and PCA projection of network profiles.

The per-node measurements are the in-, out- and undirected degree, the
clustering coefficient and the average degree of the neighbors, all cheap
enough for million-node graphs. A network is summarized by the arithmetic
means of these measurements plus its size, and collections of such profiles
are compared through a PCA on standardized features.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Sequence, Union

import numpy as np
from numba import njit

from .errors import DegenerateInput
from .graph import CitationGraph, UndirectedGraph

Graph = Union[CitationGraph, UndirectedGraph]


def degrees(g: CitationGraph):
    """Per-node ``(k_in, k_out, k_all)``.

    ``k_in``/``k_out`` count directed citations; ``k_all`` is the degree in
    the undirected simplification, where mutual citations count once.
    """
    k_in = np.bincount(g.dst, minlength=g.n).astype(np.int64)
    k_out = np.bincount(g.src, minlength=g.n).astype(np.int64)
    return k_in, k_out, g.undirected().degree()


@njit(cache=True, nogil=True)
def _triangle_counts(indptr, indices):
    # neighbor lists must be sorted; each triangle u<v<w is found once at
    # edge (u, v) and credited to all three corners
    n = indptr.shape[0] - 1
    tri = np.zeros(n, dtype=np.int64)
    for u in range(n):
        for e in range(indptr[u], indptr[u + 1]):
            v = indices[e]
            if v <= u:
                continue
            i, j = indptr[u], indptr[v]
            iend, jend = indptr[u + 1], indptr[v + 1]
            while i < iend and j < jend:
                a, b = indices[i], indices[j]
                if a < b:
                    i += 1
                elif b < a:
                    j += 1
                else:
                    if a > v:
                        tri[u] += 1
                        tri[v] += 1
                        tri[a] += 1
                    i += 1
                    j += 1
    return tri


def clustering_coefficient(g: Graph) -> np.ndarray:
    """Per-node clustering on the undirected simplification.

    ``c_i`` is the number of triangles through ``i`` divided by
    ``k(k-1)/2``; nodes with degree below two score zero.
    """
    und = g.undirected()
    indptr, indices = und.csr()
    tri = _triangle_counts(indptr, indices)
    deg = und.degree().astype(np.float64)
    pairs = deg * (deg - 1.0) / 2.0
    out = np.zeros(und.n, dtype=np.float64)
    mask = pairs > 0
    out[mask] = tri[mask] / pairs[mask]
    return out


def avg_neighbor_degree(g: Graph) -> np.ndarray:
    """Mean undirected degree over each node's neighbors (0 for isolates)."""
    und = g.undirected()
    indptr, indices = und.csr()
    deg = und.degree()
    rows = np.repeat(np.arange(und.n), np.diff(indptr))
    sums = np.bincount(rows, weights=deg[indices].astype(np.float64),
                       minlength=und.n)
    out = np.zeros(und.n, dtype=np.float64)
    mask = deg > 0
    out[mask] = sums[mask] / deg[mask]
    return out


@dataclass(frozen=True)
class TopologyProfile:
    """Network-level summary: means of the per-node measurements plus size."""

    mean_degree: float
    mean_in_degree: float
    mean_out_degree: float
    mean_clustering: float
    size: int
    mean_neighbor_degree: float

    FIELDS = ("mean_degree", "mean_in_degree", "mean_out_degree",
              "mean_clustering", "size", "mean_neighbor_degree")

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, f) for f in self.FIELDS], dtype=np.float64)


def topology_profile(g: CitationGraph) -> TopologyProfile:
    k_in, k_out, k_all = degrees(g)
    return TopologyProfile(
        mean_degree=float(k_all.mean()),
        mean_in_degree=float(k_in.mean()),
        mean_out_degree=float(k_out.mean()),
        mean_clustering=float(clustering_coefficient(g).mean()),
        size=g.n,
        mean_neighbor_degree=float(avg_neighbor_degree(g).mean()),
    )


@dataclass
class PcaProjection:
    """Coordinates of each profile in principal-component space."""

    coordinates: np.ndarray            # (n_profiles, n_components)
    explained_variance_ratio: np.ndarray


def pca_project(profiles: Sequence[TopologyProfile] | np.ndarray) -> PcaProjection:
    """Project profiles onto principal components of standardized features.

    Features are z-scored (zero-variance features dropped) before the
    eigen-decomposition of their covariance, since the raw features mix
    incomparable scales. Each eigenvector's sign is fixed so its
    largest-magnitude loading is positive.

    Raises ``DegenerateInput`` when every feature is constant.
    """
    if isinstance(profiles, np.ndarray):
        x = np.asarray(profiles, dtype=np.float64)
    else:
        x = np.array([p.as_array() for p in profiles], dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValueError("need at least two profiles")
    std = x.std(axis=0)
    keep = std > 0
    if not keep.any():
        raise DegenerateInput("all features are constant across profiles")
    z = (x[:, keep] - x[:, keep].mean(axis=0)) / std[keep]
    cov = z.T @ z / (x.shape[0] - 1)
    eigval, eigvec = np.linalg.eigh(cov)
    order = np.argsort(eigval)[::-1]
    eigval = np.clip(eigval[order], 0.0, None)
    eigvec = eigvec[:, order]
    for j in range(eigvec.shape[1]):
        if eigvec[np.argmax(np.abs(eigvec[:, j])), j] < 0:
            eigvec[:, j] = -eigvec[:, j]
    total = eigval.sum()
    if total <= 0:
        raise DegenerateInput("covariance has no positive eigenvalue")
    return PcaProjection(coordinates=z @ eigvec,
                         explained_variance_ratio=eigval / total)

"""Agreement measurements between two partitions over a shared node set.

All four scores are computed from one contingency table. NMI and AMI use
the arithmetic mean of the two marginal entropies as normalization, which
makes the V-measure with ``beta = 1`` coincide with NMI. AMI subtracts the
exact expected mutual information under the fixed-marginals permutation
model, accumulated with log-factorials so large tables do not overflow.

Note that although NMI and the V-measure live in [0, 1], the
chance-corrected AMI and ARI can legitimately be negative (worse than
chance); negative values are preserved.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import gammaln

from .errors import EmptyIntersection


@dataclass
class ContingencyTable:
    """Cross-tabulation of two label vectors over the same elements."""

    counts: np.ndarray  # (R, C) nonnegative int64

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.counts.ndim != 2 or (self.counts < 0).any():
            raise ValueError("counts must be a nonnegative 2-D table")
        if self.counts.sum() < 1:
            raise ValueError("table must describe at least one element")

    @classmethod
    def from_labels(cls, x: Sequence, y: Sequence) -> "ContingencyTable":
        x = np.asarray(x)
        y = np.asarray(y)
        if x.shape != y.shape or x.ndim != 1 or len(x) == 0:
            raise ValueError("label vectors must be equal-length and nonempty")
        _, xi = np.unique(x, return_inverse=True)
        _, yi = np.unique(y, return_inverse=True)
        r, c = xi.max() + 1, yi.max() + 1
        counts = np.bincount(xi * c + yi, minlength=r * c).reshape(r, c)
        return cls(counts)

    @property
    def a(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def b(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    @property
    def n_total(self) -> int:
        return int(self.counts.sum())


def _entropy(marginal: np.ndarray, n: int) -> float:
    p = marginal[marginal > 0] / n
    return float(-(p * np.log(p)).sum())


def mutual_information(t: ContingencyTable) -> float:
    """MI of the two labelings in nats."""
    n = t.n_total
    nz = t.counts > 0
    nij = t.counts[nz].astype(np.float64)
    outer = np.outer(t.a, t.b)[nz].astype(np.float64)
    return float((nij / n * (np.log(nij * n) - np.log(outer))).sum())


def expected_mutual_information(t: ContingencyTable) -> float:
    """Exact EMI under the permutation model with fixed marginals (nats)."""
    n = t.n_total
    a = t.a.astype(np.int64)
    b = t.b.astype(np.int64)
    lg = gammaln(np.arange(n + 2, dtype=np.float64))  # lg[k] = log((k-1)!)
    log_n = np.log(np.arange(1, n + 1, dtype=np.float64))
    emi = 0.0
    for ai in a.tolist():
        start = np.maximum(1, ai + b - n)
        end = np.minimum(ai, b)
        for j, bj in enumerate(b.tolist()):
            lo, hi = int(start[j]), int(end[j])
            if hi < lo:
                continue
            nij = np.arange(lo, hi + 1)
            log_w = (lg[ai + 1] + lg[bj + 1] + lg[n - ai + 1] + lg[n - bj + 1]
                     - lg[n + 1] - lg[nij + 1] - lg[ai - nij + 1]
                     - lg[bj - nij + 1] - lg[n - ai - bj + nij + 1])
            term = nij / n * (np.log(n) + log_n[nij - 1]
                              - np.log(float(ai)) - np.log(float(bj)))
            emi += float((term * np.exp(log_w)).sum())
    return emi


def _is_identical(t: ContingencyTable) -> bool:
    """True when the two partitions are identical up to label names."""
    nz = t.counts > 0
    return bool((nz.sum(axis=0) == 1).all() and (nz.sum(axis=1) == 1).all()
                and t.counts.shape[0] == t.counts.shape[1])


def nmi(t: ContingencyTable) -> float:
    """MI normalized by the mean of the marginal entropies.

    Two single-cluster labelings score 1; if exactly one labeling has zero
    entropy the score is 0.
    """
    n = t.n_total
    h_u, h_v = _entropy(t.a, n), _entropy(t.b, n)
    if h_u == 0.0 and h_v == 0.0:
        return 1.0
    if h_u == 0.0 or h_v == 0.0:
        return 0.0
    if _is_identical(t):
        return 1.0
    return float(np.clip(mutual_information(t) / ((h_u + h_v) / 2.0), 0.0, 1.0))


def ami(t: ContingencyTable) -> float:
    """Chance-corrected MI: ``(MI - EMI) / (mean entropy - EMI)``.

    Identical partitions score exactly 1; a zero denominator yields 0.
    """
    n = t.n_total
    h_u, h_v = _entropy(t.a, n), _entropy(t.b, n)
    if h_u == 0.0 and h_v == 0.0:
        return 1.0
    if _is_identical(t):
        return 1.0
    emi = expected_mutual_information(t)
    denom = (h_u + h_v) / 2.0 - emi
    if denom == 0.0:
        return 0.0
    return (mutual_information(t) - emi) / denom


def ari(t: ContingencyTable) -> float:
    """Chance-corrected pair-counting agreement."""
    if t.n_total < 2:
        raise ValueError("ARI needs at least two elements")
    n = t.n_total
    sum_ij = int(sum(int(v) * (int(v) - 1) // 2 for v in t.counts.ravel().tolist()))
    sum_a = int(sum(int(v) * (int(v) - 1) // 2 for v in t.a.tolist()))
    sum_b = int(sum(int(v) * (int(v) - 1) // 2 for v in t.b.tolist()))
    pairs = n * (n - 1) // 2
    # M == E exactly when (sum_a + sum_b) * pairs == 2 * sum_a * sum_b
    if (sum_a + sum_b) * pairs == 2 * sum_a * sum_b:
        return 1.0 if _is_identical(t) else 0.0
    expected = sum_a * sum_b / pairs
    max_index = (sum_a + sum_b) / 2.0
    return (sum_ij - expected) / (max_index - expected)


def v_measure(t: ContingencyTable, beta: float = 1.0) -> float:
    """Weighted harmonic mean of homogeneity and completeness.

    Homogeneity is ``1 - H(U|V)/H(U)`` (1 when ``H(U)`` is zero) and
    completeness the symmetric quantity; both equal ``MI/H``. ``beta < 1``
    favors homogeneity, ``beta > 1`` completeness; ``beta = 1`` recovers
    NMI with mean-entropy normalization.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    n = t.n_total
    h_u, h_v = _entropy(t.a, n), _entropy(t.b, n)
    if (h_u == 0.0 and h_v == 0.0) or _is_identical(t):
        return 1.0
    mi = mutual_information(t)
    h = 1.0 if h_u == 0.0 else mi / h_u
    c = 1.0 if h_v == 0.0 else mi / h_v
    if h + c == 0.0:
        return 0.0
    return float(np.clip((1.0 + beta) * h * c / (beta * h + c), 0.0, 1.0))


@dataclass
class MetricReport:
    """The four agreement scores for one comparison."""

    nmi: float
    ami: float
    ari: float
    vme: float
    beta: float = 1.0
    shared_n: int = 0


def restrict_to_shared(p1, p2):
    """Align two partitions on their common nodes.

    Returns ``(labels1, labels2, shared_ids)`` where both label vectors
    follow ``p1``'s node order. Raises ``EmptyIntersection`` when the
    partitions have no node in common.
    """
    pos2 = {nid: i for i, nid in enumerate(p2.node_ids)}
    idx1, idx2, shared = [], [], []
    for i, nid in enumerate(p1.node_ids):
        j = pos2.get(nid)
        if j is not None:
            idx1.append(i)
            idx2.append(j)
            shared.append(nid)
    if not shared:
        raise EmptyIntersection("partitions share no nodes")
    return (np.asarray(p1.labels)[idx1], np.asarray(p2.labels)[idx2], shared)


def compare_partitions(p1, p2, beta: float = 1.0) -> MetricReport:
    """All four metrics over the nodes shared by two partitions."""
    x, y, shared = restrict_to_shared(p1, p2)
    t = ContingencyTable.from_labels(x, y)
    return MetricReport(nmi=nmi(t), ami=ami(t), ari=ari(t),
                        vme=v_measure(t, beta), beta=beta, shared_n=len(shared))

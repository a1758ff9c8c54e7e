"""Robustness of a keyword-defined network against keyword removal.

The sweep rebuilds the network once per removed keyword and scores the
re-detected communities against the original partition over the shared
nodes. The greedy sequences remove keywords one at a time, steering the
surviving network size: ``best`` keeps the network as large as possible,
``worst`` shrinks it as fast as possible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Optional, Sequence

import numpy as np

from .corpus import Document, KeywordSet, build_network
from .errors import EmptyNetwork
from .graph import CitationGraph
from .mapeq import DetectionConfig, Partition, detect_communities
from .metrics import (ContingencyTable, MetricReport, compare_partitions,
                      nmi)
from .topology import TopologyProfile, topology_profile
from .util import derive_seed, parallel_map

Mode = Literal["best", "worst"]

METRIC_NAMES = ("nmi", "ami", "ari", "vme")


@dataclass
class SweepRow:
    """Outcome of removing a single keyword from the query."""

    keyword: str
    profile: TopologyProfile
    metrics: MetricReport
    normalized_size: float
    shuffled_nmi: float


@dataclass
class SweepResult:
    """One row per keyword; keywords whose removal empties the network are
    listed in ``skipped`` instead of producing a row."""

    rows: list[SweepRow]
    skipped: list[str]
    original_profile: TopologyProfile
    original_partition: Partition


@dataclass
class GreedyStep:
    keyword: str
    normalized_size: float
    metrics: MetricReport


@dataclass
class GreedyTrace:
    """Stepwise keyword removals under one greedy objective."""

    mode: Mode
    steps: list[GreedyStep]


@dataclass
class PuritySummary:
    """Per community, how dominant its most frequent keyword is."""

    fractions: np.ndarray     # indexed by community label
    top_keyword: np.ndarray   # keyword index per community
    sizes: np.ndarray         # community sizes
    mean: float
    std: float


def shuffled_baseline(p: Partition, seed: int = 0) -> float:
    """NMI between a membership vector and a uniform shuffle of itself."""
    rng = np.random.default_rng(seed)
    labels = np.asarray(p.labels)
    perm = rng.permutation(labels)
    return nmi(ContingencyTable.from_labels(labels, perm))


def single_removal_sweep(corpus: Sequence[Document], ks: KeywordSet,
                         detection: DetectionConfig, beta: float = 1.0,
                         workers: int = 1) -> SweepResult:
    """Remove each keyword in turn and compare against the full query.

    The modified networks are re-detected with the same detection settings
    as the original. Normalized size is the modified node count over the
    original node count.
    """
    if len(ks) < 2:
        raise ValueError("sweep needs at least two keywords")
    original = build_network(corpus, ks)
    base = detect_communities(original, detection, workers=workers)

    def one(i: int):
        try:
            g = build_network(corpus, ks, frozenset({i}))
        except EmptyNetwork:
            return None
        part = detect_communities(g, detection)
        return SweepRow(
            keyword=ks[i],
            profile=topology_profile(g),
            metrics=compare_partitions(base, part, beta=beta),
            normalized_size=g.n / original.n,
            shuffled_nmi=shuffled_baseline(part, derive_seed(detection.seed, 5, i)),
        )

    outcomes = parallel_map(one, range(len(ks)), workers=workers)
    rows = [r for r in outcomes if r is not None]
    skipped = [ks[i] for i, r in enumerate(outcomes) if r is None]
    return SweepResult(rows=rows, skipped=skipped,
                       original_profile=topology_profile(original),
                       original_partition=base)


def summarize_sweep(result: SweepResult) -> dict[str, tuple[float, float]]:
    """Mean and population standard deviation per metric and of normalized
    size, over all sweep rows."""
    if not result.rows:
        raise ValueError("sweep produced no rows")
    out: dict[str, tuple[float, float]] = {}
    for name in METRIC_NAMES:
        vals = np.array([getattr(r.metrics, name) for r in result.rows])
        out[name] = (float(vals.mean()), float(vals.std()))
    sizes = np.array([r.normalized_size for r in result.rows])
    out["normalized_size"] = (float(sizes.mean()), float(sizes.std()))
    return out


def _network_size(corpus: Sequence[Document], ks: KeywordSet,
                  removed: frozenset[int]) -> int:
    try:
        return build_network(corpus, ks, removed).n
    except EmptyNetwork:
        return 0


def greedy_sequence(corpus: Sequence[Document], ks: KeywordSet, mode: Mode,
                    detection: DetectionConfig, beta: float = 1.0,
                    workers: int = 1) -> GreedyTrace:
    """Iteratively remove the keyword whose removal leaves the largest
    (``best``) or smallest (``worst``) surviving network.

    Candidate networks are scored by the node count of their largest weak
    component; ties break toward the earlier keyword. The trace stops when
    one keyword remains or the network would empty. Communities of each
    chosen network are re-detected with the original detection settings and
    compared against the original partition.
    """
    if mode not in ("best", "worst"):
        raise ValueError("mode must be 'best' or 'worst'")
    if len(ks) < 2:
        raise ValueError("greedy sequence needs at least two keywords")
    original = build_network(corpus, ks)
    base = detect_communities(original, detection, workers=workers)

    remaining = list(range(len(ks)))
    removed: set[int] = set()
    steps: list[GreedyStep] = []
    while len(remaining) > 1:
        sizes = parallel_map(
            lambda c: _network_size(corpus, ks, frozenset(removed | {c})),
            remaining, workers=workers)
        pick, pick_size = None, None
        for c, size in zip(remaining, sizes):
            if (pick is None
                    or (mode == "best" and size > pick_size)
                    or (mode == "worst" and size < pick_size)):
                pick, pick_size = c, size
        if pick_size == 0:
            break
        removed.add(pick)
        remaining.remove(pick)
        g = build_network(corpus, ks, frozenset(removed))
        part = detect_communities(g, detection)
        steps.append(GreedyStep(
            keyword=ks[pick],
            normalized_size=g.n / original.n,
            metrics=compare_partitions(base, part, beta=beta)))
    return GreedyTrace(mode=mode, steps=steps)


def keyword_purity(p: Partition, incidence: Sequence[frozenset[int]]) -> PuritySummary:
    """For each community, the fraction of its nodes carrying the
    community's most frequent keyword (ties break toward the keyword
    earliest in list order)."""
    if len(incidence) != len(p.labels):
        raise ValueError("incidence does not cover the partition")
    if any(not inc for inc in incidence):
        raise ValueError("every node needs at least one keyword")
    n_comm = p.n_communities
    sizes = p.sizes()
    counts: list[dict[int, int]] = [{} for _ in range(n_comm)]
    for lab, inc in zip(p.labels.tolist(), incidence):
        d = counts[lab]
        for kw in inc:
            d[kw] = d.get(kw, 0) + 1
    fractions = np.zeros(n_comm, dtype=np.float64)
    top = np.zeros(n_comm, dtype=np.int64)
    for c in range(n_comm):
        best_kw = min(counts[c], key=lambda k: (-counts[c][k], k))
        top[c] = best_kw
        fractions[c] = counts[c][best_kw] / sizes[c]
    return PuritySummary(fractions=fractions, top_keyword=top, sizes=sizes,
                         mean=float(fractions.mean()), std=float(fractions.std()))

"""LFR-style benchmark graphs with planted communities, plus the keyword
perturbation laboratory that runs removal experiments on them.

Generation follows the classic recipe: power-law degrees, power-law
community sizes, random community assignment constrained by each node's
internal degree, configuration-model wiring of internal and external stubs,
and degree-preserving rewiring until the graph is simple and external edges
really cross communities. Whole samples are rejected until the realized
community count matches the requested ``communities`` exactly.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, replace
from typing import Literal, Optional

import numpy as np

from .errors import GenerationFailure
from .graph import UndirectedGraph
from .mapeq import DetectionConfig, Partition, detect_communities
from .metrics import ContingencyTable, nmi, restrict_to_shared
from .util import derive_seed, parallel_map

Strategy = Literal["dependent", "independent", "shuffled"]
Mode = Literal["best", "worst"]


@dataclass(frozen=True)
class LfrConfig:
    """Benchmark parameters.

    ``gamma`` is the degree exponent of ``P(k) ~ k**gamma`` (negative);
    ``tau2`` the community-size exponent of ``P(s) ~ s**(-tau2)``. The
    minimum degree is solved from ``k_avg``. ``mu_tolerance`` bounds the
    per-node external-edge fraction around ``mu`` accepted after at most
    ``rewire_sweeps`` repair sweeps.
    """

    n: int
    mu: float
    s_min: int
    s_max: int
    k_max: int
    k_avg: float
    communities: int
    gamma: float = -2.0
    tau2: float = 1.0
    mu_tolerance: float = 0.05
    rewire_sweeps: int = 200
    max_attempts: int = 1000

    def __post_init__(self):
        if not 0.0 < self.mu < 1.0:
            raise ValueError("mu must be in (0, 1)")
        if not (0 < self.s_min <= self.s_max <= self.n):
            raise ValueError("require 0 < s_min <= s_max <= n")
        if not 0 < self.k_max < self.n:
            raise ValueError("require 0 < k_max < n")
        if not (self.communities * self.s_min <= self.n
                <= self.communities * self.s_max):
            raise ValueError("community count incompatible with size bounds")
        if self.gamma >= 0:
            raise ValueError("gamma must be negative")
        if self.tau2 <= 0:
            raise ValueError("tau2 must be positive")


def _solve_k_min(gamma: float, k_avg: float, k_max: int) -> int:
    """Integer k_min whose truncated power-law mean is closest to k_avg."""
    best, best_err = 1, np.inf
    ks = np.arange(1, k_max + 1, dtype=np.float64)
    w = ks ** gamma
    for k_min in range(1, k_max):
        tail_w = w[k_min - 1:]
        mean = (ks[k_min - 1:] * tail_w).sum() / tail_w.sum()
        err = abs(mean - k_avg)
        if err < best_err:
            best, best_err = k_min, err
        if mean > k_avg:
            break  # mean grows with k_min; no better candidate follows
    return best


def _powerlaw_mean(gamma: float, k_min: int, k_max: int) -> float:
    ks = np.arange(k_min, k_max + 1, dtype=np.float64)
    w = ks ** gamma
    return float((ks * w).sum() / w.sum())


def _sample_degrees(rng, cfg: LfrConfig, k_min: int) -> np.ndarray:
    ks = np.arange(k_min, cfg.k_max + 1)
    p = ks.astype(np.float64) ** cfg.gamma
    p /= p.sum()
    expected = _powerlaw_mean(cfg.gamma, k_min, cfg.k_max)
    band = max(0.05 * cfg.k_avg, abs(expected - cfg.k_avg) + 0.02 * cfg.k_avg)
    for _ in range(1000):
        deg = rng.choice(ks, size=cfg.n, p=p)
        if deg.sum() % 2 == 0 and abs(deg.mean() - cfg.k_avg) <= band:
            return deg.astype(np.int64)
    raise GenerationFailure("could not sample an acceptable degree sequence")


def _sample_sizes(rng, cfg: LfrConfig, budget: int = 10000) -> np.ndarray:
    """Community sizes summing to n with exactly ``cfg.communities`` parts.

    Samples are drawn from the truncated power law until they fill n (the
    final draw is conditioned to fit); sequences with the wrong part count
    are rejected, which is equivalent to rejecting whole generated graphs
    on their realized community count.
    """
    vals = np.arange(cfg.s_min, cfg.s_max + 1)
    cumw = np.cumsum(vals.astype(np.float64) ** (-cfg.tau2))
    for _ in range(budget):
        sizes: list[int] = []
        total = 0
        while total < cfg.n:
            need = cfg.n - total
            if need < cfg.s_min:
                break
            hi = min(cfg.s_max, need) - cfg.s_min
            s = int(vals[np.searchsorted(cumw[:hi + 1],
                                         rng.random() * cumw[hi], "right")])
            sizes.append(s)
            total += s
        if total == cfg.n and len(sizes) == cfg.communities:
            return np.asarray(sizes, dtype=np.int64)
    raise GenerationFailure(
        f"no size sequence with {cfg.communities} communities in {budget} draws")


def _assign_communities(rng, sizes: np.ndarray, d_int: np.ndarray):
    """Random assignment honoring ``internal degree < community size``.

    Candidate communities are drawn with probability proportional to their
    headroom ``size - d_int``, which keeps near-saturating hubs out of the
    smallest communities (random uniform placement frequently produces
    non-graphical internal degree sequences there). Over-full communities
    evict a random member, as in the standard benchmark; returns None when
    the iteration budget runs out.
    """
    n = len(d_int)
    c = len(sizes)
    members: list[list[int]] = [[] for _ in range(c)]
    comm_of = np.full(n, -1, dtype=np.int64)
    free = list(rng.permutation(n))
    budget = 100 * n
    sizes_f = sizes.astype(np.float64)
    while free and budget > 0:
        budget -= 1
        v = free.pop()
        head = sizes_f - d_int[v]
        head[head < 0] = 0.0
        total = head.sum()
        if total <= 0:
            return None  # no community can host this node
        cand = int(rng.choice(c, p=head / total))
        members[cand].append(v)
        comm_of[v] = cand
        if len(members[cand]) > sizes[cand]:
            j = int(rng.integers(len(members[cand])))
            evict = members[cand][j]
            members[cand][j] = members[cand][-1]
            members[cand].pop()
            comm_of[evict] = -1
            free.append(evict)
    if free:
        return None
    return comm_of, members


def _canon(u: int, v: int):
    return (u, v) if u <= v else (v, u)


def _repair_edges(rng, edges: list, lo: int, hi: int, edge_count: Counter,
                  ok_pair, max_rounds: int) -> bool:
    """Repair edges[lo:hi] in place until each is a non-loop, globally
    unique pair accepted by ``ok_pair``.

    Rounds of degree-preserving double swaps with random partners from the
    same slice; when a round makes no progress the offending edges (plus a
    few random good ones) are dissolved and their stubs re-paired, which
    breaks saturated configurations.
    """
    span = hi - lo

    def bad_indices():
        return [i for i in range(lo, hi)
                if edges[i][0] == edges[i][1] or edge_count[edges[i]] > 1
                or not ok_pair(*edges[i])]

    prev = None
    for _ in range(max_rounds):
        bad = bad_indices()
        if not bad:
            return True
        if prev is not None and len(bad) >= prev:
            bad_set = set(bad)
            good = [i for i in range(lo, hi) if i not in bad_set]
            extra = min(len(good), 3 * len(bad))
            if extra:
                chosen = rng.choice(len(good), size=extra, replace=False)
                bad = bad + [good[int(j)] for j in chosen]
            stubs = []
            for i in bad:
                u, v = edges[i]
                edge_count[(u, v)] -= 1
                stubs.extend((u, v))
            stubs = np.asarray(stubs, dtype=np.int64)
            stubs = stubs[rng.permutation(len(stubs))]
            for slot, a, b in zip(bad, stubs[0::2].tolist(), stubs[1::2].tolist()):
                e = _canon(a, b)
                edges[slot] = e
                edge_count[e] += 1
            prev = None
            continue
        for i in bad:
            u, v = edges[i]
            if u != v and edge_count[(u, v)] <= 1 and ok_pair(u, v):
                continue  # an earlier swap already resolved this edge
            for _try in range(20):
                j = lo + int(rng.integers(span))
                if j == i:
                    continue
                x, y = edges[j]
                if rng.random() < 0.5:
                    x, y = y, x
                if u == y or x == v:
                    continue
                if not (ok_pair(u, y) and ok_pair(x, v)):
                    continue
                c_uy, c_xv = _canon(u, y), _canon(x, v)
                if c_uy == c_xv or edge_count[c_uy] > 0 or edge_count[c_xv] > 0:
                    continue
                edge_count[_canon(u, v)] -= 1
                edge_count[_canon(x, y)] -= 1
                edge_count[c_uy] += 1
                edge_count[c_xv] += 1
                edges[i] = c_uy
                edges[j] = c_xv
                break
        prev = len(bad)
    return not bad_indices()


def _internal_degrees(rng, mu: float, deg: np.ndarray) -> np.ndarray:
    """Stochastically rounded internal degrees ``(1-mu)*k``.

    Rounding up with probability equal to the fractional part keeps the
    expected external fraction at ``mu`` for every degree; deterministic
    rounding would bias low-degree nodes (e.g. k=4 at mu=0.15 would always
    get external share 0.25) and shift the realized mixing of heavy-tailed
    graphs well above ``mu``.
    """
    base = (1.0 - mu) * deg
    d_int = np.floor(base).astype(np.int64)
    d_int += (rng.random(len(deg)) < base - np.floor(base)).astype(np.int64)
    return np.minimum(d_int, deg)


def _community_graph(rng, nodes: np.ndarray, d_target: np.ndarray):
    """Random simple graph on ``nodes`` with internal degrees ``d_target``.

    Havel-Hakimi construction (max-remaining node connects to the highest
    remaining others) followed by uniformizing double-edge swaps. When a
    sequence is not graphical (several near-saturating hubs in one
    community) the unservable remainder of the current node is dropped;
    the caller turns that shortfall into external stubs, so total degrees
    are preserved. Returns ``(edges, realized_internal_degrees)``.
    """
    rem = d_target.astype(np.int64).copy()
    realized = d_target.astype(np.int64).copy()
    edges: list[tuple[int, int]] = []
    while True:
        u = int(np.argmax(rem))
        need = int(rem[u])
        if need == 0:
            break
        rem[u] = 0
        order = np.argsort(-rem, kind="stable")
        targets = order[rem[order] > 0][:need]
        if len(targets) < need:
            realized[u] -= need - len(targets)
        rem[targets] -= 1
        edges.extend(_canon(int(nodes[u]), int(nodes[t])) for t in targets)

    # shuffle while preserving degrees and simplicity
    m = len(edges)
    if m > 1:
        present = set(edges)
        n_prop = 5 * m
        ei = rng.integers(0, m, size=n_prop)
        ej = rng.integers(0, m, size=n_prop)
        flip = rng.random(n_prop) < 0.5
        for k in range(n_prop):
            i, j = int(ei[k]), int(ej[k])
            if i == j:
                continue
            u, v = edges[i]
            x, y = edges[j]
            if flip[k]:
                x, y = y, x
            if u == y or x == v:
                continue
            a, b = _canon(u, y), _canon(x, v)
            if a == b or a in present or b in present:
                continue
            present.discard(edges[i])
            present.discard(edges[j])
            present.add(a)
            present.add(b)
            edges[i] = a
            edges[j] = b
    return edges, realized


def _wire_graph(rng, cfg: LfrConfig, deg: np.ndarray, d_int: np.ndarray,
                comm_of: np.ndarray, members: list):
    """Wire internal community graphs and external stubs into a simple,
    class-consistent graph. Returns edge arrays or None on failure."""
    d_int = d_int.copy()
    edges: list[tuple[int, int]] = []
    edge_count: Counter = Counter()
    for c_members in members:
        arr = np.asarray(c_members, dtype=np.int64)
        internal, realized = _community_graph(rng, arr, d_int[arr])
        d_int[arr] = realized  # shortfalls (parity, saturation) go external
        edges.extend(internal)
    d_ext = deg - d_int
    edge_count.update(edges)

    ext_stubs = np.repeat(np.arange(cfg.n), d_ext)
    ext_stubs = ext_stubs[rng.permutation(len(ext_stubs))]
    ext_lo = len(edges)
    for a, b in zip(ext_stubs[0::2].tolist(), ext_stubs[1::2].tolist()):
        e = _canon(a, b)
        edges.append(e)
        edge_count[e] += 1
    ext_hi = len(edges)

    def cross_ok(a, b):
        return comm_of[a] != comm_of[b]

    # external edges must end up simple, distinct from the (already simple,
    # intra-community) internal edges, and cross communities
    _repair_edges(rng, edges, ext_lo, ext_hi, edge_count, cross_ok,
                  cfg.rewire_sweeps)

    # simplicity is a hard requirement
    if any(u == v for u, v in edges) or any(c > 1 for c in edge_count.values()):
        return None
    # Remaining misclassed external edges are tolerable while every node's
    # realized external fraction stays within mu_tolerance of mu, except
    # where integer stub splitting already forces a larger deviation.
    ext = np.zeros(cfg.n, dtype=np.int64)
    for u, v in edges:
        if comm_of[u] != comm_of[v]:
            ext[u] += 1
            ext[v] += 1
    frac = ext / deg
    planned_dev = np.abs(d_ext / deg - cfg.mu)
    bound = np.maximum(cfg.mu_tolerance, planned_dev) + 1e-9
    if (np.abs(frac - cfg.mu) > bound).any():
        return None
    arr = np.asarray(edges, dtype=np.int64)
    return arr[:, 0], arr[:, 1]


def generate_lfr(cfg: LfrConfig, seed: int = 0):
    """Generate one benchmark graph and its planted partition.

    Raises ``GenerationFailure`` when ``cfg.max_attempts`` samples fail.
    """
    rng = np.random.default_rng(seed)
    k_min = _solve_k_min(cfg.gamma, cfg.k_avg, cfg.k_max)
    for _ in range(cfg.max_attempts):
        deg = _sample_degrees(rng, cfg, k_min)
        sizes = _sample_sizes(rng, cfg)
        d_int = _internal_degrees(rng, cfg.mu, deg)
        if d_int.max() >= sizes.max():
            continue  # no community can host the highest-degree node
        assigned = _assign_communities(rng, sizes, d_int)
        if assigned is None:
            continue
        comm_of, members = assigned
        wired = _wire_graph(rng, cfg, deg, d_int, comm_of, members)
        if wired is None:
            continue
        u, v = wired
        graph = UndirectedGraph(cfg.n, u, v)
        planted = Partition.from_labels(graph.node_ids, comm_of)
        return graph, planted
    raise GenerationFailure(
        f"LFR generation failed after {cfg.max_attempts} attempts")


def realized_mixing(graph: UndirectedGraph, labels: np.ndarray) -> float:
    """Mean over nodes of the fraction of incident edges leaving the node's
    community."""
    labels = np.asarray(labels)
    cross = labels[graph.u] != labels[graph.v]
    ext = (np.bincount(graph.u[cross], minlength=graph.n)
           + np.bincount(graph.v[cross], minlength=graph.n))
    deg = graph.degree()
    mask = deg > 0
    return float((ext[mask] / deg[mask]).mean())


def assign_keywords(planted: Partition, strategy: Strategy,
                    rho: Optional[float] = None, seed: int = 0) -> np.ndarray:
    """Per-node keyword labels derived from the planted communities.

    ``dependent`` copies the community vector; ``independent`` permutes it
    uniformly; ``shuffled`` permutes the values of a uniformly chosen
    ``floor(rho*n)``-subset of positions among themselves.
    """
    rng = np.random.default_rng(seed)
    labels = np.asarray(planted.labels, dtype=np.int64)
    if strategy == "dependent":
        return labels.copy()
    if strategy == "independent":
        return rng.permutation(labels)
    if strategy == "shuffled":
        if rho is None or not 0.0 <= rho <= 1.0:
            raise ValueError("shuffled strategy needs rho in [0, 1]")
        out = labels.copy()
        k = int(np.floor(rho * len(labels)))
        if k >= 2:
            pos = rng.choice(len(labels), size=k, replace=False)
            out[pos] = out[pos][rng.permutation(k)]
        return out
    raise ValueError(f"unknown strategy: {strategy!r}")


@dataclass
class ToyRun:
    """Aggregated removal curves over repeated generated graphs."""

    strategy: Strategy
    mode: Mode
    rho: Optional[float]
    runs: int
    mean_nmi: np.ndarray
    std_nmi: np.ndarray
    mean_size: np.ndarray
    std_size: np.ndarray
    nmi_runs: np.ndarray   # (runs, steps)
    size_runs: np.ndarray  # (runs, steps)

    @property
    def steps(self) -> int:
        return len(self.mean_nmi)


def _single_toy_run(cfg: LfrConfig, strategy: Strategy, mode: Mode,
                    rho: Optional[float], seed: int, run_index: int,
                    trials: int):
    # graph and keyword seeds do not depend on mode, so best/worst curves
    # for the same root seed are computed on identical samples
    graph, planted = generate_lfr(cfg, derive_seed(seed, 1, run_index))
    keywords = assign_keywords(planted, strategy, rho,
                               derive_seed(seed, 2, run_index))
    det = DetectionConfig(trials=trials, seed=derive_seed(seed, 3, run_index))
    base = detect_communities(graph, det)

    remaining = sorted(set(keywords.tolist()))
    removed: set[int] = set()
    nmis: list[float] = []
    sizes: list[float] = []
    while len(remaining) > 1:
        best_kw, best_size, best_comp = None, None, None
        for kw in remaining:
            gone = removed | {kw}
            keep = ~np.isin(keywords, list(gone))
            comp = None
            size = 0
            if keep.any():
                sub = graph.subgraph(keep)
                if sub.edge_count > 0:
                    comp = sub.largest_component()
                    size = comp.n
            better = (best_size is None
                      or (mode == "best" and size > best_size)
                      or (mode == "worst" and size < best_size))
            if better:
                best_kw, best_size, best_comp = kw, size, comp
        if best_comp is None or best_size == 0:
            break
        removed.add(best_kw)
        remaining.remove(best_kw)
        part = detect_communities(best_comp, det)
        x, y, _ = restrict_to_shared(base, part)
        nmis.append(nmi(ContingencyTable.from_labels(x, y)))
        sizes.append(best_comp.n / graph.n)
    return nmis, sizes


def toy_experiment(cfg: LfrConfig, strategy: Strategy, mode: Mode,
                   runs: int = 50, seed: int = 0, rho: Optional[float] = None,
                   trials: int = 20, workers: int = 1) -> ToyRun:
    """Keyword-removal curves on generated graphs, averaged over runs.

    Per run: generate a graph, assign keywords, detect the reference
    partition, then greedily remove keywords (``best`` keeps the largest
    surviving component, ``worst`` the smallest), re-detecting communities
    after each removal and scoring NMI against the reference on the shared
    nodes. Deterministic given ``(cfg, strategy, mode, runs, seed)``.
    """
    if runs < 1:
        raise ValueError("runs must be >= 1")
    if strategy == "shuffled" and rho is None:
        raise ValueError("shuffled strategy needs rho")

    results = parallel_map(
        lambda r: _single_toy_run(cfg, strategy, mode, rho, seed, r, trials),
        range(runs), workers=workers)
    steps = min(len(nm) for nm, _ in results)
    nmi_runs = np.array([nm[:steps] for nm, _ in results])
    size_runs = np.array([sz[:steps] for _, sz in results])
    return ToyRun(
        strategy=strategy, mode=mode, rho=rho, runs=runs,
        mean_nmi=nmi_runs.mean(axis=0), std_nmi=nmi_runs.std(axis=0),
        mean_size=size_runs.mean(axis=0), std_size=size_runs.std(axis=0),
        nmi_runs=nmi_runs, size_runs=size_runs)

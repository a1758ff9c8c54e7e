"""Deterministic seed derivation and small shared helpers.

All randomness in the toolkit flows from one root seed. Every stage derives
child seeds through ``derive_seed`` so that runs are reproducible and
independent jobs (detection trials, toy-model runs) can execute in any order
or in parallel without changing results.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np


def derive_seed(root: int, *path: int) -> int:
    """Derive a child seed from a root seed and an integer path.

    Stable across runs and platforms; distinct paths give independent
    streams.
    """
    ss = np.random.SeedSequence([int(root), *(int(p) for p in path)])
    return int(ss.generate_state(1, np.uint64)[0])


def rng_from(root: int, *path: int) -> np.random.Generator:
    """A fresh PCG64 generator seeded from ``derive_seed(root, *path)``."""
    return np.random.default_rng(derive_seed(root, *path))


def parallel_map(fn, items, workers: int = 1) -> list:
    """Map ``fn`` over ``items``, preserving input order in the result.

    ``workers <= 1`` runs serially; otherwise a thread pool is used (the
    heavy kernels release the GIL). Results are identical either way.
    """
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))

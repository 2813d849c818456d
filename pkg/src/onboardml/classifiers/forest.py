"""Random forest: bagged CART trees with per-split column subsampling.

Each tree owns an independent splitmix64 stream derived from (master seed,
tree index), so a forest is reproducible tree-by-tree no matter how the work
is chunked across threads. Cross-validation uses a transient fit-and-vote
path that never materializes trees; only refitted final models are stored.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import kernels
from .tree import TreeNodes, resolve_max_features

U64_MOD = 1 << 64


def thread_count() -> int:
    """Worker cap from ONBOARD_THREADS; absent means sequential."""
    raw = os.environ.get("ONBOARD_THREADS")
    if raw is None:
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"ONBOARD_THREADS must be a positive integer, got {raw!r}")
    if value < 1:
        raise ValueError(f"ONBOARD_THREADS must be a positive integer, got {raw!r}")
    return value


def tree_seeds(master_seed: int, n_trees: int) -> np.ndarray:
    """Independent per-tree stream seeds derived from the master seed."""
    out = np.empty(n_trees, dtype=np.uint64)
    master = np.uint64(master_seed)
    for t in range(n_trees):
        out[t] = kernels.derive_seed(master, np.uint64(t))
    return out


def _chunk_ranges(total: int, workers: int) -> list[tuple[int, int]]:
    per = (total + workers - 1) // workers
    return [(a, min(a + per, total)) for a in range(0, total, per)]


@dataclass(frozen=True)
class ForestNodes:
    """Trees stacked into shared node arrays; children use absolute ids."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    positive: np.ndarray
    negative: np.ndarray
    offsets: np.ndarray  # tree t occupies nodes offsets[t]:offsets[t+1]

    @property
    def n_trees(self) -> int:
        return int(self.offsets.shape[0] - 1)


def fit(
    X: sp.csc_matrix,
    y: np.ndarray,
    *,
    n_estimators: int,
    max_features: str = "auto",
    seed: int = 0,
    threads: int | None = None,
) -> ForestNodes:
    """Fit and keep n_estimators trees, each on its own bootstrap of all rows.

    Matches the transient cross-validation path bit for bit: the bootstrap
    draw and the subsequent column draws share one stream per tree.
    """
    n_rows, n_cols = X.shape
    k = resolve_max_features(max_features, n_cols)
    y64 = np.ascontiguousarray(y, dtype=np.int64)
    seeds = tree_seeds(seed, n_estimators)

    def grow(t: int) -> TreeNodes:
        t_seed = int(seeds[t])
        samples = kernels.draw_bootstrap(np.uint64(t_seed), n_rows)
        # the bootstrap consumed n_rows draws; growing picks up the stream
        grow_state = (t_seed + n_rows * kernels.GOLD_INT) % U64_MOD
        arrays = kernels.fit_tree(
            X.data, X.indices, X.indptr, n_rows, n_cols, y64, samples,
            kernels.GINI, kernels.SPLIT_BEST, k, 2, 1, np.uint64(grow_state),
        )
        return TreeNodes(*arrays)

    workers = thread_count() if threads is None else threads
    if workers > 1 and n_estimators > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            trees = list(pool.map(grow, range(n_estimators)))
    else:
        trees = [grow(t) for t in range(n_estimators)]

    counts = np.array([t.node_count for t in trees], dtype=np.int64)
    offsets = np.zeros(n_estimators + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    feature = np.concatenate([t.feature for t in trees])
    threshold = np.concatenate([t.threshold for t in trees])
    left = np.concatenate([
        np.where(t.feature >= 0, t.left + offsets[i], -1)
        for i, t in enumerate(trees)
    ])
    right = np.concatenate([
        np.where(t.feature >= 0, t.right + offsets[i], -1)
        for i, t in enumerate(trees)
    ])
    positive = np.concatenate([t.positive for t in trees])
    negative = np.concatenate([t.negative for t in trees])
    return ForestNodes(feature, threshold, left, right, positive, negative, offsets)


def vote_scores(nodes: ForestNodes, X: sp.csr_matrix) -> np.ndarray:
    """Fraction of trees voting positive, one value per row."""
    votes = kernels.stacked_forest_votes(
        nodes.feature, nodes.threshold, nodes.left, nodes.right,
        nodes.positive, nodes.negative, nodes.offsets,
        X.data, X.indices, X.indptr, X.shape[0],
    )
    return votes / nodes.n_trees


def transient_vote_scores(
    X: sp.csc_matrix,
    y: np.ndarray,
    X_val: sp.csr_matrix,
    *,
    n_estimators: int,
    max_features: str,
    seed: int,
    threads: int | None = None,
) -> np.ndarray:
    """Fit a forest and score validation rows without keeping any tree.

    Vote totals are accumulated per chunk of trees and summed, which equals
    sequential fitting exactly (integer addition commutes).
    """
    n_rows, n_cols = X.shape
    k = resolve_max_features(max_features, n_cols)
    y64 = np.ascontiguousarray(y, dtype=np.int64)
    seeds = tree_seeds(seed, n_estimators)
    n_val = X_val.shape[0]

    def run(rng: tuple[int, int]) -> np.ndarray:
        return kernels.forest_votes_range(
            X.data, X.indices, X.indptr, n_rows, n_cols, y64,
            seeds, rng[0], rng[1], k, 2, 1,
            X_val.data, X_val.indices, X_val.indptr, n_val,
        )

    workers = thread_count() if threads is None else threads
    if workers > 1 and n_estimators > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, _chunk_ranges(n_estimators, workers)))
        votes = np.sum(parts, axis=0)
    else:
        votes = run((0, n_estimators))
    return votes / n_estimators

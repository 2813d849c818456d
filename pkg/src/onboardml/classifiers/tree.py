"""CART decision trees over sparse feature matrices.

Trees are stored as parallel node arrays (structure-of-arrays) so the same
layout serves single trees, stacked forests, and JSON persistence. Node 0 is
the root; leaves carry feature -1 and the training class counts that reached
them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import kernels

CRITERIA = ("gini", "entropy")
SPLITTERS = ("best", "random")
FEATURE_OPTIONS = ("all", "auto", "sqrt", "log2")

_CRITERION_CODE = {"gini": kernels.GINI, "entropy": kernels.ENTROPY}
_SPLITTER_CODE = {"best": kernels.SPLIT_BEST, "random": kernels.SPLIT_RANDOM}


def resolve_max_features(option: str, n_features: int) -> int:
    """Candidate feature count examined per split; "auto" is an alias of sqrt."""
    if n_features < 1:
        raise ValueError("need at least one feature")
    if option == "all":
        return n_features
    if option in ("auto", "sqrt"):
        return min(n_features, math.ceil(math.sqrt(n_features)))
    if option == "log2":
        return min(n_features, max(1, math.ceil(math.log2(n_features))))
    raise ValueError(f"unknown max_features option: {option!r}")


def canonical_csc(matrix) -> sp.csc_matrix:
    """CSC copy with no stored zeros and sorted indices (kernels require it)."""
    out = sp.csc_matrix(matrix, copy=True)
    out.eliminate_zeros()
    out.sort_indices()
    return out


def canonical_csr(matrix) -> sp.csr_matrix:
    out = sp.csr_matrix(matrix, copy=True)
    out.eliminate_zeros()
    out.sort_indices()
    return out


@dataclass(frozen=True)
class TreeNodes:
    """One fitted tree. Leaves have feature == -1."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    positive: np.ndarray
    negative: np.ndarray

    @property
    def node_count(self) -> int:
        return int(self.feature.shape[0])

    @property
    def leaf_count(self) -> int:
        return int(np.count_nonzero(self.feature < 0))


def fit(
    X: sp.csc_matrix,
    y: np.ndarray,
    *,
    criterion: str = "gini",
    splitter: str = "best",
    max_features: str = "all",
    min_samples_split: int = 2,
    min_samples_leaf: int = 1,
    seed: int = 0,
    sample_rows: np.ndarray | None = None,
) -> TreeNodes:
    """Grow a tree on X[sample_rows] (defaults to every row, no repeats).

    Thresholds sit at midpoints of consecutive distinct values of the chosen
    column; a node becomes a leaf when pure, too small, or when no split
    strictly decreases impurity. Equal-gain splits keep the first one found
    walking candidate columns in ascending index order.
    """
    if criterion not in _CRITERION_CODE:
        raise ValueError(f"unknown criterion: {criterion!r}")
    if splitter not in _SPLITTER_CODE:
        raise ValueError(f"unknown splitter: {splitter!r}")
    n_rows, n_cols = X.shape
    if sample_rows is None:
        sample_rows = np.arange(n_rows, dtype=np.int64)
    k = resolve_max_features(max_features, n_cols)
    feature, threshold, left, right, pos, neg = kernels.fit_tree(
        X.data,
        X.indices,
        X.indptr,
        n_rows,
        n_cols,
        np.ascontiguousarray(y, dtype=np.int64),
        np.ascontiguousarray(sample_rows, dtype=np.int64),
        _CRITERION_CODE[criterion],
        _SPLITTER_CODE[splitter],
        k,
        min_samples_split,
        min_samples_leaf,
        np.uint64(seed),
    )
    return TreeNodes(feature, threshold, left, right, pos, neg)


def leaf_stats(nodes: TreeNodes, X: sp.csr_matrix) -> tuple[np.ndarray, np.ndarray]:
    """(positive, negative) training counts of the leaf each row reaches."""
    pos, neg = kernels.tree_leaf_stats(
        nodes.feature,
        nodes.threshold,
        nodes.left,
        nodes.right,
        nodes.positive,
        nodes.negative,
        X.data,
        X.indices,
        X.indptr,
        X.shape[0],
    )
    return pos, neg


def positive_scores(nodes: TreeNodes, X: sp.csr_matrix) -> np.ndarray:
    """Positive fraction of the reached leaf, one value per row."""
    pos, neg = leaf_stats(nodes, X)
    return pos / (pos + neg)

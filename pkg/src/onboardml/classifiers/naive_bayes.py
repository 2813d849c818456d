"""Gaussian naive Bayes with max-variance smoothing.

Likelihoods are evaluated sparsely: the all-zeros row gets a precomputed
baseline per class, and each stored entry contributes only its correction
term. Full rows are never densified.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp


@dataclass(frozen=True)
class NbParams:
    log_prior: np.ndarray  # (2,), order [negative, positive]
    mean: np.ndarray  # (2, d)
    variance: np.ndarray  # (2, d), smoothing included
    epsilon: float  # the additive smoothing actually applied


def _class_moments(X: sp.csr_matrix, rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    sub = X[rows]
    cnt = rows.shape[0]
    s1 = np.asarray(sub.sum(axis=0)).ravel()
    s2 = np.asarray(sub.multiply(sub).sum(axis=0)).ravel()
    mean = s1 / cnt
    var = np.maximum(s2 / cnt - mean * mean, 0.0)
    return mean, var


def fit(X: sp.csr_matrix, y: np.ndarray, *, var_smoothing: float) -> NbParams:
    """Per-class priors from frequencies, per-feature Gaussian moments.

    Every variance gets var_smoothing times the largest per-feature variance
    of the pooled data added; when even that is zero (all-constant columns)
    the raw var_smoothing is used so densities stay finite.
    """
    n = X.shape[0]
    y = np.asarray(y)
    mean = np.empty((2, X.shape[1]))
    variance = np.empty((2, X.shape[1]))
    counts = np.empty(2)
    for cls in (0, 1):
        rows = np.flatnonzero(y == cls)
        counts[cls] = rows.shape[0]
        mean[cls], variance[cls] = _class_moments(X, rows)
    _, pooled_var = _class_moments(X, np.arange(n))
    epsilon = var_smoothing * float(pooled_var.max()) if pooled_var.max() > 0.0 else var_smoothing
    variance += epsilon
    log_prior = np.log(counts / n)
    return NbParams(log_prior, mean, variance, float(epsilon))


def log_joint(params: NbParams, X: sp.csr_matrix) -> np.ndarray:
    """(n, 2) array of log prior + log likelihood per class."""
    n = X.shape[0]
    out = np.empty((n, 2))
    row_of = np.repeat(np.arange(n), np.diff(X.indptr))
    for cls in (0, 1):
        mu = params.mean[cls]
        var = params.variance[cls]
        const = -0.5 * float(np.log(2.0 * np.pi * var).sum())
        zero_row = -0.5 * float((mu * mu / var).sum())
        mu_nz = mu[X.indices]
        var_nz = var[X.indices]
        d = X.data - mu_nz
        corr = -0.5 * (d * d - mu_nz * mu_nz) / var_nz
        sums = np.bincount(row_of, weights=corr, minlength=n)
        out[:, cls] = params.log_prior[cls] + const + zero_row + sums
    return out


def positive_posterior(params: NbParams, X: sp.csr_matrix) -> np.ndarray:
    """P(positive | row), computed stably from the log joint difference."""
    lj = log_joint(params, X)
    diff = np.clip(lj[:, 0] - lj[:, 1], -700.0, 700.0)
    return 1.0 / (1.0 + np.exp(diff))

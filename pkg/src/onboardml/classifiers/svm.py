"""Linear soft-margin SVM trained by seeded stochastic sub-gradient descent.

Objective: (1/2)||w||^2 + C * sum_i hinge(y_i, w.x_i + b), minimized with the
1/(lambda*t) step schedule, lambda = 1/(C*n), over a fixed number of epochs.
The bias is updated by the hinge sub-gradient but never shrunk.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import kernels


@dataclass(frozen=True)
class SvmParams:
    weights: np.ndarray
    bias: float


def fit(X: sp.csr_matrix, y: np.ndarray, *, c: float, epochs: int, seed: int) -> SvmParams:
    if not np.isfinite(X.data).all():
        raise ValueError("feature matrix contains non-finite values")
    y_signed = np.where(np.asarray(y) == 1, 1.0, -1.0)
    w, b = kernels.pegasos_train(
        X.data, X.indices, X.indptr, X.shape[0], X.shape[1],
        y_signed, float(c), int(epochs), np.uint64(seed),
    )
    return SvmParams(w, float(b))


def decision_scores(params: SvmParams, X: sp.csr_matrix) -> np.ndarray:
    """Signed margins w.x + b; non-negative means positive."""
    return np.asarray(X @ params.weights).ravel() + params.bias


def objective(params: SvmParams, X: sp.csr_matrix, y: np.ndarray, c: float) -> float:
    """Primal objective value; exposed for optimizer quality checks."""
    y_signed = np.where(np.asarray(y) == 1, 1.0, -1.0)
    margins = y_signed * decision_scores(params, X)
    hinge = np.maximum(0.0, 1.0 - margins).sum()
    return 0.5 * float(params.weights @ params.weights) + c * float(hinge)

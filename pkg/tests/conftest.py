import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import HealthCheck, settings

from onboardml.classifiers import forest, kernels, svm, tree

settings.register_profile(
    "suite",
    derandomize=True,
    deadline=None,
    max_examples=50,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def warm_kernels():
    """Force jit compilation once so timed tests measure compute, not compilation."""
    X = sp.csc_matrix(
        np.array([[0.0, 1.0], [1.0, 0.0], [0.5, 0.5], [0.0, 0.2]]), dtype=np.float64
    )
    y = np.array([0, 1, 1, 0], dtype=np.int64)
    for criterion in ("gini", "entropy"):
        for splitter in ("best", "random"):
            tree.fit(X, y, criterion=criterion, splitter=splitter, seed=3)
    forest.fit(X, y, n_estimators=2, max_features="sqrt", seed=3)
    forest.transient_vote_scores(
        X, y, sp.csr_matrix(X), n_estimators=2, max_features="log2", seed=3
    )
    svm.fit(sp.csr_matrix(X), y, c=1.0, epochs=2, seed=3)
    kernels.derive_seed(np.uint64(1), np.uint64(2))
    return True

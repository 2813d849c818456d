"""Issue-tracker onboarding toolkit.

Labels resolved issues by who fixed them (early-tenure contributors vs.
everyone else, and first-timers who stuck around vs. those who left), turns
issue text into TF-IDF + sentiment + length features, and benchmarks four
from-scratch classifiers at recommending issues for project newcomers.
"""

from .corpus import Dataset, Issue, SchemaError, load_dataset, save_dataset
from .roles import NEWCOMER_THRESHOLDS, RoleLabeling, label_rq1, label_rq2

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "Issue",
    "NEWCOMER_THRESHOLDS",
    "RoleLabeling",
    "SchemaError",
    "__version__",
    "label_rq1",
    "label_rq2",
    "load_dataset",
    "save_dataset",
]

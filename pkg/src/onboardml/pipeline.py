"""Benchmark engine: held-out split, balanced sampling runs, grid search with
stratified cross-validation, test evaluation, and report assembly.

Every random choice flows through a pure-Python splitmix64 stream seeded by
sha256-derived sub-seeds, so identical inputs and master seed reproduce the
reports byte for byte on any platform. The held-out test split is drawn once
per labeling; each of the five sampling runs rebuilds the vocabulary from its
own balanced multiset so nothing from the test rows can reach a fit.
"""

from __future__ import annotations

import csv
import hashlib
import itertools
import json
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import roles
from .classifiers import api
from .classifiers import forest as forest_mod
from .classifiers import naive_bayes as nb_mod
from .classifiers import svm as svm_mod
from .classifiers import tree as tree_mod
from .classifiers.api import MODEL_KINDS, TrainedModel, TrainingError
from .classifiers.tree import canonical_csc, canonical_csr
from .corpus import Dataset, Issue, word_count
from .features.sentiment import default_lexicon, score_sentiment
from .features.vectorize import (
    FeatureMatrix,
    assemble_features,
    build_vocabulary,
    issue_tokens,
    transform,
)

DEFAULT_TEST_FRACTION = 0.15
DEFAULT_SAMPLING_RUNS = 5
DEFAULT_CV_FOLDS = 10
METRICS = ("precision", "recall", "f1")

DEFAULT_GRIDS: dict[str, dict[str, list]] = {
    "RandomForest": {
        "n_estimators": [100, 1000, 3000],
        "max_features": ["auto", "sqrt", "log2"],
    },
    "DecisionTree": {
        "criterion": ["gini", "entropy"],
        "splitter": ["best", "random"],
        "min_samples_split": [2, 5, 10],
        "min_samples_leaf": [1, 2, 4],
    },
    "GaussianNB": {"var_smoothing": [1e-9, 1e-7, 1e-5]},
    "SVM": {"C": [0.1, 1, 10]},
}

KIND_ALIASES = {
    "rf": "RandomForest",
    "dt": "DecisionTree",
    "gnb": "GaussianNB",
    "svm": "SVM",
}


class PipelineError(Exception):
    """Invalid pipeline configuration or an aborted benchmark stage."""


_MASK = (1 << 64) - 1


class _SplitMix:
    """splitmix64 stream; avoids numpy generators so byte-identical output
    does not depend on the installed numpy version."""

    def __init__(self, seed: int):
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        return self.next_u64() % n

    def shuffle(self, items: list) -> None:
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]


def derive_seed(master: int, *tokens: object) -> int:
    """Stable named sub-seed: sha256 over the master seed and stage tokens."""
    payload = json.dumps([int(master), *[str(t) for t in tokens]], separators=(",", ":"))
    digest = hashlib.sha256(payload.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass(frozen=True)
class SplitPlan:
    seed: int
    test_fraction: float = DEFAULT_TEST_FRACTION
    stratified: bool = True

    def __post_init__(self) -> None:
        if not 0.0 < self.test_fraction < 1.0:
            raise PipelineError(
                f"test_fraction must lie in (0, 1), got {self.test_fraction}"
            )


def _class_test_counts(n_pos: int, n_neg: int, fraction: float) -> tuple[int, int]:
    """Per-class test counts: proportional floors, remainder to the largest
    fractional part (positive class first on ties)."""
    total_target = math.floor((n_pos + n_neg) * fraction + 0.5)
    exact = (n_pos * fraction, n_neg * fraction)
    counts = [math.floor(exact[0]), math.floor(exact[1])]
    extras = total_target - counts[0] - counts[1]
    order = sorted((0, 1), key=lambda c: (-(exact[c] - counts[c]), c))
    i = 0
    while extras > 0:
        counts[order[i % 2]] += 1
        extras -= 1
        i += 1
    return counts[0], counts[1]


def stratified_split(
    labels_by_id: Mapping[str, bool], plan: SplitPlan
) -> tuple[list[str], list[str]]:
    """Partition ids into (train, test), sampling each class separately.

    Output lists keep the input iteration order; only membership is random.
    """
    pos = [i for i, v in labels_by_id.items() if v]
    neg = [i for i, v in labels_by_id.items() if not v]
    if len(pos) < 2 or len(neg) < 2:
        raise PipelineError(
            f"stratified split needs at least 2 issues per class, "
            f"got {len(pos)} positive / {len(neg)} negative"
        )
    take_pos, take_neg = _class_test_counts(len(pos), len(neg), plan.test_fraction)
    rng = _SplitMix(plan.seed)
    test_set: set[str] = set()
    for ids, take in ((pos, take_pos), (neg, take_neg)):
        if take >= len(ids):
            raise PipelineError(
                f"test fraction {plan.test_fraction} would consume an entire class"
            )
        order = list(ids)
        rng.shuffle(order)
        test_set.update(order[:take])
    train_ids = [i for i in labels_by_id if i not in test_set]
    test_ids = [i for i in labels_by_id if i in test_set]
    return train_ids, test_ids


@dataclass(frozen=True)
class BalancedSample:
    """Training rows after balancing; id repeats come only from the minority."""

    ids: tuple[str, ...]
    target_size: int  # per-class size after balancing
    seed: int


def balance(
    train_ids: Sequence[str], labels_by_id: Mapping[str, bool], seed: int
) -> BalancedSample:
    """Equalize classes at s = min(2 * |minority|, |majority|) rows each.

    The minority is duplicated cyclically in its train order up to s; the
    majority is under-sampled uniformly without replacement down to s.
    """
    pos = [i for i in train_ids if labels_by_id[i]]
    neg = [i for i in train_ids if not labels_by_id[i]]
    if not pos or not neg:
        raise PipelineError("balancing needs both classes in the training split")
    minority, majority = (pos, neg) if len(pos) <= len(neg) else (neg, pos)
    target = min(2 * len(minority), len(majority))
    cycled = list(itertools.islice(itertools.cycle(minority), target))
    pool = list(majority)
    _SplitMix(seed).shuffle(pool)
    return BalancedSample(tuple(cycled + pool[:target]), target, seed)


def _deal_chunks(items: list[int], folds: list[list[int]], from_start: bool) -> None:
    k = len(folds)
    base, extra = divmod(len(items), k)
    cursor = 0
    for f in range(k):
        bonus = (f < extra) if from_start else (f >= k - extra)
        size = base + (1 if bonus else 0)
        folds[f].extend(items[cursor : cursor + size])
        cursor += size


def kfold(
    sample: BalancedSample,
    labels_by_id: Mapping[str, bool],
    k: int = DEFAULT_CV_FOLDS,
    seed: int = 0,
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Stratified k-fold over sample positions (repeats stay distinct rows).

    Validation folds are disjoint, cover the sample, and differ in size by at
    most one: leftover positives go to the first folds, leftover negatives to
    the last ones.
    """
    if k < 2:
        raise PipelineError(f"k-fold needs k >= 2, got {k}")
    pos_positions = [p for p, i in enumerate(sample.ids) if labels_by_id[i]]
    neg_positions = [p for p, i in enumerate(sample.ids) if not labels_by_id[i]]
    if len(pos_positions) < k or len(neg_positions) < k:
        raise PipelineError(
            f"{k}-fold CV needs at least {k} rows per class, got "
            f"{len(pos_positions)} positive / {len(neg_positions)} negative"
        )
    rng = _SplitMix(seed)
    rng.shuffle(pos_positions)
    rng.shuffle(neg_positions)
    val_lists: list[list[int]] = [[] for _ in range(k)]
    _deal_chunks(pos_positions, val_lists, from_start=True)
    _deal_chunks(neg_positions, val_lists, from_start=False)
    everything = set(range(len(sample.ids)))
    out = []
    for chunk in val_lists:
        val = np.array(sorted(chunk), dtype=np.int64)
        train = np.array(sorted(everything.difference(chunk)), dtype=np.int64)
        out.append((train, val))
    return out


def binary_metrics(y_true, y_pred) -> tuple[float, float, float]:
    """Positive-class precision, recall, F1 with zero-denominator -> 0.0."""
    t = np.asarray(y_true).astype(bool)
    p = np.asarray(y_pred).astype(bool)
    if t.shape != p.shape:
        raise PipelineError(
            f"prediction length {p.shape} does not match labels {t.shape}"
        )
    tp = int(np.count_nonzero(t & p))
    fp = int(np.count_nonzero(~t & p))
    fn = int(np.count_nonzero(t & ~p))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


@dataclass(frozen=True)
class GridCell:
    kind: str
    hyperparameters: dict
    index: int  # position in grid order; the tie-breaker everywhere


def expand_grid(kind: str, axes: Mapping[str, Sequence]) -> list[GridCell]:
    """Cartesian product over axes in their declared key order."""
    keys = list(axes.keys())
    for key in keys:
        if not isinstance(axes[key], (list, tuple)) or len(axes[key]) == 0:
            raise PipelineError(f"grid axis {key!r} for {kind} must be a non-empty list")
    cells = []
    for combo in itertools.product(*(axes[key] for key in keys)):
        hp = dict(zip(keys, combo))
        try:
            api.validate_hyperparameters(kind, hp)
        except TrainingError as exc:
            raise PipelineError(f"invalid grid for {kind}: {exc}") from exc
        cells.append(GridCell(kind, hp, len(cells)))
    if not cells:
        raise PipelineError(f"grid for {kind} expanded to zero cells")
    return cells


@dataclass(frozen=True)
class CvResult:
    cell: GridCell
    fold_precision: tuple[float, ...]
    fold_recall: tuple[float, ...]
    fold_f1: tuple[float, ...]
    mean_precision: float
    mean_recall: float
    mean_f1: float
    score: float  # mean of the selected metric; 0.0 for failed cells
    failure: str | None = None


@dataclass
class _FoldData:
    x_train_csc: object
    x_train_csr: object
    y_train: np.ndarray
    x_val_csr: object
    y_val: np.ndarray


def _build_fold_data(x_csr, y: np.ndarray, folds) -> list[_FoldData]:
    out = []
    for train_pos, val_pos in folds:
        x_train = x_csr[train_pos]
        x_val = x_csr[val_pos]
        out.append(
            _FoldData(
                canonical_csc(x_train),
                x_train,
                y[train_pos],
                x_val,
                y[val_pos],
            )
        )
    return out


def _fit_score_fold(cell: GridCell, fd: _FoldData, fit_seed: int,
                    threads: int | None) -> tuple[float, float, float]:
    hp = api.validate_hyperparameters(cell.kind, cell.hyperparameters)
    if cell.kind == "RandomForest":
        votes = forest_mod.transient_vote_scores(
            fd.x_train_csc,
            fd.y_train,
            fd.x_val_csr,
            n_estimators=hp["n_estimators"],
            max_features=hp["max_features"],
            seed=fit_seed,
            threads=threads,
        )
        y_pred = votes > 0.5
    elif cell.kind == "DecisionTree":
        nodes = tree_mod.fit(
            fd.x_train_csc,
            fd.y_train,
            criterion=hp["criterion"],
            splitter=hp["splitter"],
            max_features=hp["max_features"],
            min_samples_split=hp["min_samples_split"],
            min_samples_leaf=hp["min_samples_leaf"],
            seed=fit_seed,
        )
        y_pred = tree_mod.positive_scores(nodes, fd.x_val_csr) > 0.5
    elif cell.kind == "GaussianNB":
        params = nb_mod.fit(fd.x_train_csr, fd.y_train, var_smoothing=hp["var_smoothing"])
        y_pred = nb_mod.positive_posterior(params, fd.x_val_csr) > 0.5
    else:
        try:
            params = svm_mod.fit(
                fd.x_train_csr, fd.y_train, c=hp["C"], epochs=hp["epochs"], seed=fit_seed
            )
        except ValueError as exc:
            raise TrainingError(str(exc)) from exc
        y_pred = svm_mod.decision_scores(params, fd.x_val_csr) >= 0.0
    return binary_metrics(fd.y_val, y_pred)


def _search_folds(
    fold_data: list[_FoldData],
    grid: Sequence[GridCell],
    seed: int,
    metric: str,
    threads: int | None = None,
) -> tuple[GridCell, list[CvResult]]:
    if not grid:
        raise PipelineError("grid search needs at least one cell")
    if metric not in METRICS:
        raise PipelineError(f"metric must be one of {', '.join(METRICS)}, got {metric!r}")
    metric_pos = METRICS.index(metric)
    results: list[CvResult] = []
    for cell in grid:
        triples: list[tuple[float, float, float]] = []
        failure = None
        for fold_index, fd in enumerate(fold_data):
            fit_seed = derive_seed(seed, cell.index, fold_index)
            try:
                triples.append(_fit_score_fold(cell, fd, fit_seed, threads))
            except TrainingError as exc:
                failure = f"fold {fold_index}: {exc}"
                break
        if failure is not None:
            results.append(CvResult(cell, (), (), (), 0.0, 0.0, 0.0, 0.0, failure))
            continue
        p, r, f = (tuple(t[i] for t in triples) for i in range(3))
        means = (
            sum(p) / len(p),
            sum(r) / len(r),
            sum(f) / len(f),
        )
        results.append(CvResult(cell, p, r, f, means[0], means[1], means[2], means[metric_pos]))
    best = max(results, key=lambda res: res.score)  # max keeps the earliest tie
    return best.cell, results


def grid_search(
    features: FeatureMatrix,
    labels: Sequence[int],
    folds: Sequence[tuple[np.ndarray, np.ndarray]],
    grid: Sequence[GridCell],
    *,
    seed: int,
    metric: str = "precision",
    threads: int | None = None,
) -> tuple[GridCell, list[CvResult]]:
    """Cross-validate every cell; best = argmax mean metric, ties to the
    earliest cell. A cell whose fit raises records score 0 and a diagnostic."""
    y = np.asarray(labels, dtype=np.int64)
    x_csr = canonical_csr(features.combined())
    fold_data = _build_fold_data(x_csr, y, folds)
    return _search_folds(fold_data, grid, seed, metric, threads)


def evaluate(
    model: TrainedModel, features: FeatureMatrix, labels: Sequence[int]
) -> tuple[float, float, float]:
    """Positive-class precision/recall/F1 of the model on the given rows."""
    y = np.asarray(labels, dtype=np.int64)
    if y.shape[0] != features.n_rows:
        raise PipelineError(
            f"labels length {y.shape[0]} does not match {features.n_rows} rows"
        )
    preds = api.predict(model, features)
    y_pred = np.array([1 if p.label == "positive" else 0 for p in preds], dtype=np.int64)
    return binary_metrics(y, y_pred)


@dataclass(frozen=True)
class RunResult:
    run_index: int
    balance_seed: int
    kfold_seed: int
    cv_seed: int
    refit_seed: int
    best_cell: GridCell
    best_score: float
    cv_results: tuple[CvResult, ...]
    test_precision: float
    test_recall: float
    test_f1: float


@dataclass(frozen=True)
class BenchmarkRow:
    question: str
    threshold: int | None
    classifier: str
    positive_count: int
    negative_count: int
    train_size: int
    test_size: int
    runs: tuple[RunResult, ...]
    mean_precision: float
    mean_recall: float
    mean_f1: float
    modal_cell: GridCell | None
    error: str | None = None

    @property
    def question_label(self) -> str:
        if self.threshold is None:
            return self.question
        return f"{self.question}:{self.threshold}"


@dataclass(frozen=True)
class BenchmarkReport:
    project: str
    question: str
    thresholds: tuple[int, ...]
    classifiers: tuple[str, ...]
    metric: str
    seed: int
    test_fraction: float
    sampling_runs: int
    cv_folds: int
    rows: tuple[BenchmarkRow, ...]


def _issue_extras(issue: Issue, lexicon: dict[str, int]) -> tuple[float, float, float]:
    score = score_sentiment(issue.description, lexicon)
    return float(score.positive), float(score.negative), float(word_count(issue.description))


def _feature_rows(
    ids: Sequence[str],
    vocabulary,
    tokens_by_id: dict[str, list[str]],
    extras_by_id: dict[str, tuple[float, float, float]],
) -> FeatureMatrix:
    tfidf = transform(vocabulary, (tokens_by_id[i] for i in ids))
    if ids:
        extras = np.array([extras_by_id[i] for i in ids], dtype=np.float64)
    else:
        extras = np.empty((0, 3), dtype=np.float64)
    return FeatureMatrix(list(ids), vocabulary, tfidf, extras)


def _error_row(labeling: roles.RoleLabeling, kind: str, message: str) -> BenchmarkRow:
    return BenchmarkRow(
        question=labeling.question,
        threshold=labeling.threshold,
        classifier=kind,
        positive_count=labeling.positive_count(),
        negative_count=labeling.negative_count(),
        train_size=0,
        test_size=0,
        runs=(),
        mean_precision=0.0,
        mean_recall=0.0,
        mean_f1=0.0,
        modal_cell=None,
        error=message,
    )


def _modal_cell(runs: Sequence[RunResult], grid: Sequence[GridCell]) -> GridCell:
    counts = Counter(run.best_cell.index for run in runs)
    winner = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[0][0]
    return grid[winner]


def run_benchmark(
    dataset: Dataset,
    *,
    question: str,
    seed: int,
    thresholds: Sequence[int] = roles.NEWCOMER_THRESHOLDS,
    classifiers: Sequence[str] = MODEL_KINDS,
    grids: Mapping[str, Mapping[str, Sequence]] | None = None,
    test_fraction: float = DEFAULT_TEST_FRACTION,
    sampling_runs: int = DEFAULT_SAMPLING_RUNS,
    cv_folds: int = DEFAULT_CV_FOLDS,
    metric: str = "precision",
    threads: int | None = None,
) -> BenchmarkReport:
    """Full benchmark for one question: label, split once per labeling, then
    for each sampling run balance, grid-search, refit the winning cell, and
    score the untouched test rows. Failed labelings become error rows; the
    run fails outright only when every labeling is unusable.
    """
    if question not in ("rq1", "rq2"):
        raise PipelineError(f"question must be rq1 or rq2, got {question!r}")
    if sampling_runs < 1:
        raise PipelineError(f"sampling_runs must be >= 1, got {sampling_runs}")
    kinds = []
    for kind in classifiers:
        resolved = KIND_ALIASES.get(kind, kind)
        if resolved not in MODEL_KINDS:
            raise PipelineError(f"unknown classifier kind: {kind!r}")
        if resolved not in kinds:
            kinds.append(resolved)
    if not kinds:
        raise PipelineError("no classifier kinds requested")
    grid_axes: dict[str, Mapping[str, Sequence]] = dict(DEFAULT_GRIDS)
    if grids:
        for kind, axes in grids.items():
            resolved = KIND_ALIASES.get(kind, kind)
            if resolved not in MODEL_KINDS:
                raise PipelineError(f"grid names unknown classifier kind: {kind!r}")
            grid_axes[resolved] = axes
    grids_expanded = {kind: expand_grid(kind, grid_axes[kind]) for kind in kinds}

    if question == "rq1":
        seen: set[int] = set()
        labelings = []
        for t in thresholds:
            if not isinstance(t, int) or t < 1:
                raise PipelineError(f"thresholds must be positive integers, got {t!r}")
            if t in seen:
                continue
            seen.add(t)
            labelings.append(roles.label_rq1(dataset, t))
        if not labelings:
            raise PipelineError("rq1 benchmark needs at least one threshold")
        report_thresholds = tuple(sorted(seen))
    else:
        labelings = [roles.label_rq2(dataset)]
        report_thresholds = ()

    issues_by_id = {issue.id: issue for issue in dataset.issues}
    lexicon = default_lexicon()
    tokens_by_id: dict[str, list[str]] = {}
    extras_by_id: dict[str, tuple[float, float, float]] = {}

    def ensure_cached(ids: Sequence[str]) -> None:
        for i in ids:
            if i not in tokens_by_id:
                issue = issues_by_id[i]
                tokens_by_id[i] = issue_tokens(issue)
                extras_by_id[i] = _issue_extras(issue, lexicon)

    rows: list[BenchmarkRow] = []
    for labeling in labelings:
        qlabel = labeling.question_label
        label_map = labeling.labels
        try:
            plan = SplitPlan(seed=derive_seed(seed, qlabel, "split"), test_fraction=test_fraction)
            train_ids, test_ids = stratified_split(label_map, plan)
        except PipelineError as exc:
            for kind in kinds:
                rows.append(_error_row(labeling, kind, str(exc)))
            continue
        test_set = frozenset(test_ids)
        y_test = [1 if label_map[i] else 0 for i in test_ids]
        ensure_cached(train_ids)
        ensure_cached(test_ids)

        run_results: dict[str, list[RunResult]] = {kind: [] for kind in kinds}
        run_error: str | None = None
        for run_index in range(sampling_runs):
            balance_seed = derive_seed(seed, qlabel, "balance", run_index)
            kfold_seed = derive_seed(seed, qlabel, "kfold", run_index)
            try:
                sample = balance(train_ids, label_map, balance_seed)
                if not test_set.isdisjoint(sample.ids):
                    raise PipelineError(
                        "internal error: balanced sample overlaps the test split"
                    )
                folds = kfold(sample, label_map, cv_folds, kfold_seed)
            except PipelineError as exc:
                run_error = str(exc)
                break
            # per-run vocabulary over the balanced multiset: duplicated rows
            # contribute to document frequencies on purpose
            vocabulary = build_vocabulary(tokens_by_id[i] for i in sample.ids)
            fm_balanced = _feature_rows(sample.ids, vocabulary, tokens_by_id, extras_by_id)
            fm_test = _feature_rows(test_ids, vocabulary, tokens_by_id, extras_by_id)
            y_balanced = np.array(
                [1 if label_map[i] else 0 for i in sample.ids], dtype=np.int64
            )
            x_csr = canonical_csr(fm_balanced.combined())
            fold_data = _build_fold_data(x_csr, y_balanced, folds)
            for kind in kinds:
                cv_seed = derive_seed(seed, qlabel, "cv", run_index, kind)
                refit_seed = derive_seed(seed, qlabel, "refit", run_index, kind)
                best_cell, cv_results = _search_folds(
                    fold_data, grids_expanded[kind], cv_seed, metric, threads
                )
                best_score = cv_results[best_cell.index].score
                model = api.train(
                    api.ModelSpec(kind, best_cell.hyperparameters, refit_seed),
                    fm_balanced,
                    y_balanced,
                )
                precision, recall, f1 = evaluate(model, fm_test, y_test)
                run_results[kind].append(
                    RunResult(
                        run_index=run_index,
                        balance_seed=balance_seed,
                        kfold_seed=kfold_seed,
                        cv_seed=cv_seed,
                        refit_seed=refit_seed,
                        best_cell=best_cell,
                        best_score=best_score,
                        cv_results=tuple(cv_results),
                        test_precision=precision,
                        test_recall=recall,
                        test_f1=f1,
                    )
                )
        if run_error is not None:
            for kind in kinds:
                rows.append(_error_row(labeling, kind, run_error))
            continue
        for kind in kinds:
            runs = tuple(run_results[kind])
            rows.append(
                BenchmarkRow(
                    question=labeling.question,
                    threshold=labeling.threshold,
                    classifier=kind,
                    positive_count=labeling.positive_count(),
                    negative_count=labeling.negative_count(),
                    train_size=len(train_ids),
                    test_size=len(test_ids),
                    runs=runs,
                    mean_precision=sum(r.test_precision for r in runs) / len(runs),
                    mean_recall=sum(r.test_recall for r in runs) / len(runs),
                    mean_f1=sum(r.test_f1 for r in runs) / len(runs),
                    modal_cell=_modal_cell(runs, grids_expanded[kind]),
                )
            )

    if rows and all(row.error is not None for row in rows):
        raise PipelineError(f"benchmark failed for every labeling: {rows[0].error}")
    return BenchmarkReport(
        project=dataset.project,
        question=question,
        thresholds=report_thresholds,
        classifiers=tuple(kinds),
        metric=metric,
        seed=seed,
        test_fraction=test_fraction,
        sampling_runs=sampling_runs,
        cv_folds=cv_folds,
        rows=tuple(rows),
    )


def prepare_training_sample(
    dataset: Dataset, labeling: roles.RoleLabeling, seed: int
) -> tuple[BalancedSample, FeatureMatrix, np.ndarray]:
    """Balanced sample over every labeled issue, ready for a final fit.

    No held-out split: this is for producing a deployable model, not for
    measurement. The vocabulary comes from the balanced multiset, same as a
    benchmark sampling run.
    """
    issues_by_id = {issue.id: issue for issue in dataset.issues}
    missing = [i for i in labeling.labels if i not in issues_by_id]
    if missing:
        raise PipelineError(f"labeling names unknown issue id: {missing[0]!r}")
    sample = balance(list(labeling.labels), labeling.labels, seed)
    lexicon = default_lexicon()
    tokens_by_id: dict[str, list[str]] = {}
    extras_by_id: dict[str, tuple[float, float, float]] = {}
    for i in sample.ids:
        if i not in tokens_by_id:
            issue = issues_by_id[i]
            tokens_by_id[i] = issue_tokens(issue)
            extras_by_id[i] = _issue_extras(issue, lexicon)
    vocabulary = build_vocabulary(tokens_by_id[i] for i in sample.ids)
    fm = _feature_rows(sample.ids, vocabulary, tokens_by_id, extras_by_id)
    y = np.array([1 if labeling.labels[i] else 0 for i in sample.ids], dtype=np.int64)
    return sample, fm, y


def tag_issues(
    model: TrainedModel, issues: Sequence[Issue]
) -> list[tuple[str, api.Prediction]]:
    """Score issues with the model and rank them most-recommended first.

    Descending score; equal scores order by issue id. The positive-labeled
    prefix is the recommendation list.
    """
    if not issues:
        return []
    fm = assemble_features(list(issues), model.vocabulary)
    preds = api.predict(model, fm)
    order = sorted(range(len(issues)), key=lambda i: (-preds[i].score, fm.issue_ids[i]))
    return [(fm.issue_ids[i], preds[i]) for i in order]


def _cell_to_dict(cell: GridCell | None) -> dict | None:
    if cell is None:
        return None
    return {"index": cell.index, "kind": cell.kind, "hyperparameters": cell.hyperparameters}


def _cv_result_to_dict(res: CvResult) -> dict:
    return {
        "cell": _cell_to_dict(res.cell),
        "fold_precision": list(res.fold_precision),
        "fold_recall": list(res.fold_recall),
        "fold_f1": list(res.fold_f1),
        "mean_precision": res.mean_precision,
        "mean_recall": res.mean_recall,
        "mean_f1": res.mean_f1,
        "score": res.score,
        "failure": res.failure,
    }


def _run_to_dict(run: RunResult) -> dict:
    return {
        "run": run.run_index,
        "seeds": {
            "balance": run.balance_seed,
            "kfold": run.kfold_seed,
            "cv": run.cv_seed,
            "refit": run.refit_seed,
        },
        "best_cell": _cell_to_dict(run.best_cell),
        "best_score": run.best_score,
        "cv": [_cv_result_to_dict(res) for res in run.cv_results],
        "test": {
            "precision": run.test_precision,
            "recall": run.test_recall,
            "f1": run.test_f1,
        },
    }


def report_to_dict(report: BenchmarkReport) -> dict:
    return {
        "format": "onboardml-benchmark",
        "version": 1,
        "project": report.project,
        "question": report.question,
        "thresholds": list(report.thresholds),
        "classifiers": list(report.classifiers),
        "metric": report.metric,
        "seed": report.seed,
        "test_fraction": report.test_fraction,
        "sampling_runs": report.sampling_runs,
        "cv_folds": report.cv_folds,
        "rows": [
            {
                "question_label": row.question_label,
                "question": row.question,
                "threshold": row.threshold,
                "classifier": row.classifier,
                "positive_count": row.positive_count,
                "negative_count": row.negative_count,
                "train_size": row.train_size,
                "test_size": row.test_size,
                "mean": {
                    "precision": row.mean_precision,
                    "recall": row.mean_recall,
                    "f1": row.mean_f1,
                },
                "modal_cell": _cell_to_dict(row.modal_cell),
                "error": row.error,
                "runs": [_run_to_dict(run) for run in row.runs],
            }
            for row in report.rows
        ],
    }


def write_report_json(report: BenchmarkReport, path: str | Path) -> None:
    doc = json.dumps(report_to_dict(report), sort_keys=True, indent=2)
    Path(path).write_text(doc + "\n", encoding="utf-8")


def write_report_csv(report: BenchmarkReport, path: str | Path) -> None:
    """One row per labeling x classifier: project, question, threshold,
    classifier, precision, recall, f1, best. Error rows leave metrics blank.

    The best column carries "*" on the classifier with the highest mean
    precision within each labeling (first row wins ties).
    """
    best_rows: set[int] = set()
    by_label: dict[str, tuple[int, float]] = {}
    for idx, row in enumerate(report.rows):
        if row.error is not None:
            continue
        current = by_label.get(row.question_label)
        if current is None or row.mean_precision > current[1]:
            by_label[row.question_label] = (idx, row.mean_precision)
    best_rows = {idx for idx, _ in by_label.values()}
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(
            [
                "project",
                "question",
                "threshold",
                "classifier",
                "precision",
                "recall",
                "f1",
                "best",
            ]
        )
        for idx, row in enumerate(report.rows):
            threshold = "" if row.threshold is None else str(row.threshold)
            if row.error is not None:
                writer.writerow(
                    [report.project, row.question, threshold, row.classifier, "", "", "", ""]
                )
                continue
            writer.writerow(
                [
                    report.project,
                    row.question,
                    threshold,
                    row.classifier,
                    f"{row.mean_precision:.6f}",
                    f"{row.mean_recall:.6f}",
                    f"{row.mean_f1:.6f}",
                    "*" if idx in best_rows else "",
                ]
            )

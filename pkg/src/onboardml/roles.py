"""Contributor role labeling: newcomer cutoffs, monthly activity, retention."""

from __future__ import annotations

import csv
import statistics
from collections import defaultdict
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path

from .corpus import Dataset

Month = tuple[int, int]  # (year, month)

NEWCOMER_THRESHOLDS = (1, 5, 10)
ACTIVE_STREAK_MONTHS = 6


def month_of(ts: datetime) -> Month:
    return (ts.year, ts.month)


def month_index(month: Month) -> int:
    # consecutive calendar months map to consecutive integers across year ends
    return month[0] * 12 + (month[1] - 1)


@dataclass(frozen=True)
class ContributorHistory:
    contributor_id: str
    resolutions: tuple[tuple[str, datetime], ...]  # (issue id, resolved_at), ascending
    monthly_counts: dict[Month, int]

    @property
    def total(self) -> int:
        return len(self.resolutions)


def build_histories(dataset: Dataset) -> dict[str, ContributorHistory]:
    """Per-contributor resolution history, in dataset resolution order."""
    order: dict[str, list[tuple[str, datetime]]] = defaultdict(list)
    for issue in dataset.issues:
        if issue.resolved:
            order[issue.resolver_id].append((issue.id, issue.resolved_at))
    histories = {}
    for contributor, resolutions in order.items():
        counts: dict[Month, int] = defaultdict(int)
        for _, resolved_at in resolutions:
            counts[month_of(resolved_at)] += 1
        histories[contributor] = ContributorHistory(
            contributor_id=contributor,
            resolutions=tuple(resolutions),
            monthly_counts=dict(counts),
        )
    return histories


def monthly_medians(histories: dict[str, ContributorHistory]) -> dict[Month, float]:
    """Median of per-contributor resolved counts, over contributors active that month.

    Contributors with zero resolutions in a month do not enter that month's
    median, so every median is >= 1.
    """
    per_month: dict[Month, list[int]] = defaultdict(list)
    for history in histories.values():
        for month, count in history.monthly_counts.items():
            per_month[month].append(count)
    return {month: float(statistics.median(counts)) for month, counts in per_month.items()}


def monthly_active(history: ContributorHistory, month: Month, medians: dict[Month, float]) -> bool:
    """True when the contributor resolved at least the month's median count."""
    count = history.monthly_counts.get(month, 0)
    if count == 0:
        return False
    return count >= medians[month]


def active_months(history: ContributorHistory, medians: dict[Month, float]) -> list[Month]:
    months = [m for m in history.monthly_counts if monthly_active(history, m, medians)]
    return sorted(months, key=month_index)


def _has_streak(months: list[Month], streak: int) -> bool:
    indices = [month_index(m) for m in months]
    run = 1
    for previous, current in zip(indices, indices[1:]):
        run = run + 1 if current == previous + 1 else 1
        if run >= streak:
            return True
    return streak <= 1 and bool(indices)


def active_developers(dataset: Dataset, streak: int = ACTIVE_STREAK_MONTHS) -> frozenset[str]:
    """Contributors who were monthly-active for `streak` consecutive calendar
    months at any point in the dataset period."""
    histories = build_histories(dataset)
    medians = monthly_medians(histories)
    return _active_from_histories(histories, medians, streak)


def _active_from_histories(
    histories: dict[str, ContributorHistory],
    medians: dict[Month, float],
    streak: int = ACTIVE_STREAK_MONTHS,
) -> frozenset[str]:
    return frozenset(
        contributor
        for contributor, history in histories.items()
        if _has_streak(active_months(history, medians), streak)
    )


@dataclass(frozen=True)
class RoleLabeling:
    """Binary labels over a subset of resolved issue ids."""

    question: str                     # "rq1" or "rq2"
    threshold: int | None             # newcomer cutoff for rq1, None for rq2
    labels: dict[str, bool]           # issue id -> positive, in dataset order
    active_developers: frozenset[str] = frozenset()  # populated for rq2

    @property
    def question_label(self) -> str:
        if self.question == "rq1":
            return f"rq1:{self.threshold}"
        return self.question

    def positive_count(self) -> int:
        return sum(self.labels.values())

    def negative_count(self) -> int:
        return len(self.labels) - self.positive_count()


def label_rq1(dataset: Dataset, threshold: int) -> RoleLabeling:
    """Label every resolved issue: positive iff it is among its resolver's
    first `threshold` resolved issues."""
    if threshold < 1:
        raise ValueError(f"newcomer threshold must be >= 1, got {threshold}")
    histories = build_histories(dataset)
    positive_ids = {
        issue_id
        for history in histories.values()
        for issue_id, _ in history.resolutions[:threshold]
    }
    labels = {issue.id: issue.id in positive_ids for issue in dataset.issues if issue.resolved}
    return RoleLabeling(question="rq1", threshold=threshold, labels=labels)


def label_rq2(dataset: Dataset, streak: int = ACTIVE_STREAK_MONTHS) -> RoleLabeling:
    """Label each contributor's first resolved issue: positive iff the
    contributor ever became an active developer."""
    histories = build_histories(dataset)
    medians = monthly_medians(histories)
    active = _active_from_histories(histories, medians, streak)
    first_issue = {history.resolutions[0][0]: contributor
                   for contributor, history in histories.items()}
    labels = {
        issue.id: first_issue[issue.id] in active
        for issue in dataset.issues
        if issue.resolved and issue.id in first_issue
    }
    return RoleLabeling(question="rq2", threshold=None, labels=labels, active_developers=active)


def write_labels_csv(labeling: RoleLabeling, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["issue_id", "question", "label"])
        for issue_id, positive in labeling.labels.items():
            writer.writerow([issue_id, labeling.question_label, "positive" if positive else "negative"])

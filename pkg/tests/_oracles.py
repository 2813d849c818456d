"""Independent reference implementations used to cross-check production code.

Everything here is deliberately written the slow, obvious way: dense python
lists, exhaustive scans, and manual medians. Where exact agreement on tied
split candidates matters, the split scorer uses the same documented formula
(side score tables with math.log2) so that mathematically equal candidates
compare equal in floating point too.
"""

from __future__ import annotations

import math
from collections import defaultdict

GINI = "gini"
ENTROPY = "entropy"


def score_tables(m: int) -> tuple[list[float], list[float]]:
    inv = [0.0] * (m + 1)
    xlog = [0.0] * (m + 1)
    for i in range(1, m + 1):
        inv[i] = 1.0 / i
        xlog[i] = i * math.log2(i)
    return inv, xlog


def side_score(pos: int, neg: int, inv, xlog, criterion: str) -> float:
    if criterion == GINI:
        return (pos * pos + neg * neg) * inv[pos + neg]
    return xlog[pos] + xlog[neg] - xlog[pos + neg]


def brute_root_split(
    rows: list[list[float]],
    y: list[int],
    criterion: str,
    min_samples_split: int = 2,
    min_samples_leaf: int = 1,
) -> tuple[int, float] | None:
    """Exhaustive first-best root split, or None when the root stays a leaf.

    Scan order and tie handling follow the production contract: features in
    ascending column order, thresholds ascending within a feature, and only a
    strictly better split replaces the incumbent.
    """
    n = len(rows)
    pos = sum(y)
    neg = n - pos
    if pos == 0 or neg == 0 or n < min_samples_split or n < 2 * min_samples_leaf:
        return None
    inv, xlog = score_tables(n)
    best_score = side_score(pos, neg, inv, xlog, criterion)
    best: tuple[int, float] | None = None
    d = len(rows[0]) if rows else 0
    for f in range(d):
        groups: dict[float, list[int]] = {}
        for row, label in zip(rows, y):
            cell = groups.setdefault(row[f], [0, 0])
            cell[label] += 1
        ordered = sorted(groups.items())
        lp = ln = 0
        for b in range(len(ordered) - 1):
            lp += ordered[b][1][1]
            ln += ordered[b][1][0]
            ml = lp + ln
            mr = n - ml
            if ml < min_samples_leaf or mr < min_samples_leaf:
                continue
            score = side_score(lp, ln, inv, xlog, criterion) + side_score(
                pos - lp, neg - ln, inv, xlog, criterion
            )
            if score > best_score:
                thr = 0.5 * (ordered[b][0] + ordered[b + 1][0])
                if thr >= ordered[b + 1][0]:
                    thr = ordered[b][0]
                best_score = score
                best = (f, thr)
    return best


def median(values) -> float:
    ordered = sorted(values)
    n = len(ordered)
    if n == 0:
        raise ValueError("median of nothing")
    mid = n // 2
    if n % 2 == 1:
        return float(ordered[mid])
    return (ordered[mid - 1] + ordered[mid]) / 2.0


def role_reference(dataset, thresholds=(1, 5, 10), streak: int = 6):
    """Recompute every labeling directly from the issue list.

    Returns (rq1 labels per threshold, monthly medians, active months per
    contributor, active developer set, rq2 labels).
    """
    resolved = sorted(
        (i for i in dataset.issues if i.resolver_id is not None),
        key=lambda i: (i.resolved_at, i.id),
    )
    per: dict[str, list] = defaultdict(list)
    for issue in resolved:
        per[issue.resolver_id].append(issue)

    rq1 = {}
    for t in thresholds:
        early = set()
        for issues in per.values():
            early.update(i.id for i in issues[:t])
        rq1[t] = {i.id: i.id in early for i in resolved}

    counts: dict[str, dict[tuple[int, int], int]] = defaultdict(lambda: defaultdict(int))
    for issue in resolved:
        month = (issue.resolved_at.year, issue.resolved_at.month)
        counts[issue.resolver_id][month] += 1
    by_month: dict[tuple[int, int], list[int]] = defaultdict(list)
    for month_map in counts.values():
        for month, n in month_map.items():
            by_month[month].append(n)
    medians = {month: median(ns) for month, ns in by_month.items()}

    active_months = {
        c: sorted(
            (m for m, n in month_map.items() if n >= medians[m]),
            key=lambda m: m[0] * 12 + m[1],
        )
        for c, month_map in counts.items()
    }

    def has_streak(months: list[tuple[int, int]]) -> bool:
        if streak <= 1:
            return bool(months)
        indices = [m[0] * 12 + m[1] for m in months]
        run = 1
        for a, b in zip(indices, indices[1:]):
            run = run + 1 if b == a + 1 else 1
            if run >= streak:
                return True
        return False

    active = frozenset(c for c, months in active_months.items() if has_streak(months))
    rq2 = {issues[0].id: c in active for c, issues in per.items()}
    return rq1, medians, active_months, active, rq2


def confusion_metrics(y_true, y_pred) -> tuple[float, float, float]:
    tp = sum(1 for t, p in zip(y_true, y_pred) if t == 1 and p == 1)
    fp = sum(1 for t, p in zip(y_true, y_pred) if t == 0 and p == 1)
    fn = sum(1 for t, p in zip(y_true, y_pred) if t == 1 and p == 0)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1

"""Issue-tracker corpus: JSONL loading, schema validation, descriptive stats."""

from __future__ import annotations

import json
import statistics
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable


class SchemaError(ValueError):
    """An input record violates the issue export schema."""

    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        self.line = line
        self.field = field
        prefix = ""
        if line is not None:
            prefix += f"line {line}: "
        if field is not None:
            prefix += f"field '{field}': "
        super().__init__(prefix + message)


@dataclass(frozen=True)
class Issue:
    id: str
    project: str
    title: str
    description: str
    resolver_id: str | None  # None while the issue is unresolved
    created_at: datetime     # timezone-aware, stored in UTC
    resolved_at: datetime | None

    @property
    def resolved(self) -> bool:
        return self.resolver_id is not None


@dataclass
class Dataset:
    """An ordered issue collection for a single project.

    Resolved issues come first, ascending by (resolved_at, id); unresolved
    issues follow, ascending by (created_at, id). Issue ids are unique.
    """

    project: str
    issues: list[Issue]

    def resolved_issues(self) -> list[Issue]:
        return [i for i in self.issues if i.resolved]

    def unresolved_issues(self) -> list[Issue]:
        return [i for i in self.issues if not i.resolved]

    def contributors(self) -> set[str]:
        return {i.resolver_id for i in self.issues if i.resolver_id is not None}

    def __len__(self) -> int:
        return len(self.issues)


def parse_timestamp(raw: object, line: int | None = None, field: str | None = None) -> datetime:
    """Parse an RFC 3339 timestamp into an aware UTC datetime."""
    if not isinstance(raw, str):
        raise SchemaError("timestamp must be a string", line, field)
    text = raw[:-1] + "+00:00" if raw.endswith(("Z", "z")) else raw
    try:
        value = datetime.fromisoformat(text)
    except ValueError:
        raise SchemaError(f"invalid RFC 3339 timestamp {raw!r}", line, field) from None
    if value.tzinfo is None:
        raise SchemaError(f"timestamp {raw!r} lacks a UTC offset", line, field)
    return value.astimezone(timezone.utc)


def format_timestamp(value: datetime) -> str:
    return value.astimezone(timezone.utc).isoformat().replace("+00:00", "Z")


def _require_string(record: dict, key: str, line: int) -> str:
    if key not in record:
        raise SchemaError("required field is missing", line, key)
    value = record[key]
    if not isinstance(value, str):
        raise SchemaError("expected a string", line, key)
    return value


def parse_issue_record(record: object, line: int) -> Issue:
    if not isinstance(record, dict):
        raise SchemaError("record must be a JSON object", line)
    issue_id = _require_string(record, "id", line)
    if not issue_id:
        raise SchemaError("id must be non-empty", line, "id")
    project = _require_string(record, "project", line)
    title = _require_string(record, "title", line)
    description = record.get("description", "")
    if not isinstance(description, str):
        raise SchemaError("expected a string", line, "description")
    resolver_id = record.get("resolver_id")
    if resolver_id is not None and not isinstance(resolver_id, str):
        raise SchemaError("expected a string or null", line, "resolver_id")
    created_at = parse_timestamp(record.get("created_at"), line, "created_at")
    raw_resolved = record.get("resolved_at")
    resolved_at = None if raw_resolved is None else parse_timestamp(raw_resolved, line, "resolved_at")
    if (resolved_at is None) != (resolver_id is None):
        raise SchemaError("resolved_at must be present exactly when resolver_id is", line, "resolved_at")
    if resolved_at is not None and resolved_at < created_at:
        raise SchemaError("resolved_at precedes created_at", line, "resolved_at")
    return Issue(
        id=issue_id,
        project=project,
        title=title,
        description=description,
        resolver_id=resolver_id,
        created_at=created_at,
        resolved_at=resolved_at,
    )


def _order_key(issue: Issue) -> tuple:
    if issue.resolved:
        return (0, issue.resolved_at, issue.id)
    return (1, issue.created_at, issue.id)


def build_dataset(issues: Iterable[Issue]) -> Dataset:
    """Assemble a Dataset, enforcing id uniqueness and a single project."""
    ordered = sorted(issues, key=_order_key)
    seen: set[str] = set()
    project: str | None = None
    for issue in ordered:
        if issue.id in seen:
            raise SchemaError(f"duplicate issue id {issue.id!r}", field="id")
        seen.add(issue.id)
        if project is None:
            project = issue.project
        elif issue.project != project:
            raise SchemaError(
                f"mixed projects in one export: {project!r} and {issue.project!r}",
                field="project",
            )
    return Dataset(project=project or "", issues=ordered)


def load_dataset(path: str | Path) -> Dataset:
    """Load a JSONL issue export. Raises SchemaError naming line and field."""
    issues: list[Issue] = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"invalid JSON: {exc.msg}", line_no) from None
            issue = parse_issue_record(record, line_no)
            if issue.id in seen:
                raise SchemaError(f"duplicate issue id {issue.id!r}", line_no, "id")
            seen.add(issue.id)
            issues.append(issue)
    return build_dataset(issues)


def issue_to_record(issue: Issue) -> dict:
    return {
        "id": issue.id,
        "project": issue.project,
        "title": issue.title,
        "description": issue.description,
        "resolver_id": issue.resolver_id,
        "created_at": format_timestamp(issue.created_at),
        "resolved_at": None if issue.resolved_at is None else format_timestamp(issue.resolved_at),
    }


def save_dataset(dataset: Dataset, path: str | Path) -> None:
    """Write the dataset back out as JSONL; load_dataset round-trips it."""
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for issue in dataset.issues:
            handle.write(json.dumps(issue_to_record(issue), ensure_ascii=False))
            handle.write("\n")


def word_count(text: str) -> int:
    # whitespace tokenization; consecutive separators collapse
    return len(text.split())


@dataclass(frozen=True)
class DatasetStats:
    issue_count: int
    resolved_count: int
    contributor_count: int
    period_start: datetime | None  # earliest created_at
    period_end: datetime | None    # latest resolved_at
    avg_title_chars: float
    avg_title_words: float
    avg_description_chars: float
    avg_description_words: float


def compute_stats(dataset: Dataset) -> DatasetStats:
    issues = dataset.issues
    n = len(issues)
    if n == 0:
        return DatasetStats(0, 0, 0, None, None, 0.0, 0.0, 0.0, 0.0)
    resolved = [i for i in issues if i.resolved]
    return DatasetStats(
        issue_count=n,
        resolved_count=len(resolved),
        contributor_count=len(dataset.contributors()),
        period_start=min(i.created_at for i in issues),
        period_end=max((i.resolved_at for i in resolved), default=None),
        avg_title_chars=sum(len(i.title) for i in issues) / n,
        avg_title_words=sum(word_count(i.title) for i in issues) / n,
        avg_description_chars=sum(len(i.description) for i in issues) / n,
        avg_description_words=sum(word_count(i.description) for i in issues) / n,
    )


SECONDS_PER_DAY = 86400.0


def resolution_gaps(dataset: Dataset) -> dict[str, list[float]]:
    """Per contributor: gaps in fractional days between consecutive resolutions.

    Only contributors with two or more resolved issues appear. Resolution
    order follows the dataset ordering (resolved_at, then id).
    """
    per_contributor: dict[str, list[datetime]] = {}
    for issue in dataset.issues:
        if issue.resolved:
            per_contributor.setdefault(issue.resolver_id, []).append(issue.resolved_at)
    gaps: dict[str, list[float]] = {}
    for contributor, times in per_contributor.items():
        if len(times) < 2:
            continue
        gaps[contributor] = [
            (later - earlier).total_seconds() / SECONDS_PER_DAY
            for earlier, later in zip(times, times[1:])
        ]
    return gaps


@dataclass(frozen=True)
class IrfStats:
    """Issue-resolution-frequency aggregates across contributors.

    mean_gap_* aggregates the per-contributor mean gap series, median_gap_*
    the per-contributor median gap series. SDs are population (ddof 0).
    """

    contributor_count: int
    avg_mean_gap: float
    median_mean_gap: float
    sd_mean_gap: float
    avg_median_gap: float
    median_median_gap: float
    sd_median_gap: float


def compute_irf(dataset: Dataset) -> IrfStats:
    gaps = resolution_gaps(dataset)
    if not gaps:
        return IrfStats(0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    means = [statistics.fmean(g) for g in gaps.values()]
    medians = [statistics.median(g) for g in gaps.values()]
    return IrfStats(
        contributor_count=len(gaps),
        avg_mean_gap=statistics.fmean(means),
        median_mean_gap=statistics.median(means),
        sd_mean_gap=statistics.pstdev(means),
        avg_median_gap=statistics.fmean(medians),
        median_median_gap=statistics.median(medians),
        sd_median_gap=statistics.pstdev(medians),
    )

"""Command-line entry point: ingest, benchmark, train, tag.

Machine-readable results always land in files; stdout carries short human
summaries. Exit codes are a stable contract: 0 success, 1 usage error,
2 input schema violation, 3 pipeline or training failure, 4 artifact
mismatch. Stochastic commands require an explicit --seed so that re-running
with identical arguments reproduces every output byte for byte.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import statistics
import sys
from pathlib import Path

from . import corpus, pipeline, roles
from .classifiers import api
from .classifiers.forest import thread_count

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_SCHEMA = 2
EXIT_PIPELINE = 3
EXIT_ARTIFACT = 4

SINGLE_KINDS = ("rf", "dt", "gnb", "svm")


class _UsageError(Exception):
    """Bad flags or flag values; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on its own; that slot belongs to schema
    # errors here, so route parse failures through the usage path instead
    def error(self, message: str):
        raise _UsageError(f"{self.prog}: {message}")


def build_parser() -> _Parser:
    parser = _Parser(
        prog="onboard",
        description="Label, benchmark, and recommend newcomer-suitable issues.",
    )
    sub = parser.add_subparsers(dest="command", metavar="command")

    p_ingest = sub.add_parser(
        "ingest", help="validate a JSONL issue export and print corpus statistics"
    )
    p_ingest.add_argument("--input", required=True, help="JSONL issue export")
    p_ingest.add_argument(
        "--output-dir", help="also write stats.json and irf.csv here"
    )

    p_bench = sub.add_parser(
        "benchmark", help="run the full labeled benchmark and write reports"
    )
    p_bench.add_argument("--input", required=True, help="JSONL issue export")
    p_bench.add_argument("--output-dir", required=True)
    p_bench.add_argument("--question", required=True, choices=("rq1", "rq2"))
    p_bench.add_argument(
        "--thresholds",
        default="1,5,10",
        help="comma-separated newcomer cutoffs for rq1 (default 1,5,10)",
    )
    p_bench.add_argument("--grid", help="JSON file overriding hyperparameter grids")
    p_bench.add_argument("--seed", required=True, help="master seed, 0 <= seed < 2^64")
    p_bench.add_argument(
        "--classifier", default="all", choices=SINGLE_KINDS + ("all",)
    )
    p_bench.add_argument(
        "--metric", default="precision", choices=pipeline.METRICS
    )

    p_train = sub.add_parser(
        "train", help="fit one configuration on balanced labels and save the model"
    )
    p_train.add_argument("--input", required=True, help="JSONL issue export")
    p_train.add_argument("--output-dir", required=True)
    p_train.add_argument("--question", required=True, choices=("rq1", "rq2"))
    p_train.add_argument(
        "--thresholds", help="single newcomer cutoff (required for rq1)"
    )
    p_train.add_argument(
        "--grid",
        required=True,
        help="JSON file whose axes for the chosen classifier name exactly one cell",
    )
    p_train.add_argument("--seed", required=True, help="master seed, 0 <= seed < 2^64")
    p_train.add_argument("--classifier", required=True, choices=SINGLE_KINDS)

    p_tag = sub.add_parser(
        "tag", help="rank unresolved issues with a trained model"
    )
    p_tag.add_argument("--input", required=True, help="JSONL issue export")
    p_tag.add_argument("--model", required=True, help="model JSON from `train`")
    p_tag.add_argument("--output-dir", required=True)

    return parser


def _parse_seed(raw: str) -> int:
    try:
        value = int(raw)
    except ValueError:
        raise _UsageError(f"--seed must be an integer, got {raw!r}") from None
    if not 0 <= value <= api.MAX_SEED:
        raise _UsageError(f"--seed must be in [0, 2^64), got {raw}")
    return value


def _parse_thresholds(raw: str) -> tuple[int, ...]:
    parts = [piece.strip() for piece in raw.split(",")]
    if not any(parts):
        raise _UsageError("--thresholds must list at least one positive integer")
    values: list[int] = []
    for piece in parts:
        if not piece:
            continue
        try:
            value = int(piece)
        except ValueError:
            raise _UsageError(
                f"--thresholds entries must be integers, got {piece!r}"
            ) from None
        if value < 1:
            raise _UsageError(f"--thresholds entries must be >= 1, got {value}")
        if value not in values:
            values.append(value)
    return tuple(values)


def _threads() -> int:
    try:
        return thread_count()
    except ValueError as exc:
        raise _UsageError(str(exc)) from None


def _load_input(path: str) -> corpus.Dataset:
    try:
        return corpus.load_dataset(path)
    except OSError as exc:
        raise corpus.SchemaError(f"cannot read input file {path}: {exc}") from exc


def _load_grid_file(path: str) -> dict:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise pipeline.PipelineError(f"cannot read grid file {path}: {exc}") from exc
    if not isinstance(doc, dict) or not all(
        isinstance(axes, dict) for axes in doc.values()
    ):
        raise pipeline.PipelineError(
            "grid file must map classifier kinds to {hyperparameter: [values]} objects"
        )
    return doc


def _ensure_dir(raw: str) -> Path:
    path = Path(raw)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _fmt_ts(value) -> str:
    return corpus.format_timestamp(value) if value is not None else "-"


def _stats_document(
    dataset: corpus.Dataset, stats: corpus.DatasetStats, irf: corpus.IrfStats
) -> dict:
    return {
        "format": "onboardml-stats",
        "version": 1,
        "project": dataset.project,
        "issue_count": stats.issue_count,
        "resolved_count": stats.resolved_count,
        "unresolved_count": stats.issue_count - stats.resolved_count,
        "contributor_count": stats.contributor_count,
        "period_start": (
            corpus.format_timestamp(stats.period_start) if stats.period_start else None
        ),
        "period_end": (
            corpus.format_timestamp(stats.period_end) if stats.period_end else None
        ),
        "title": {
            "avg_chars": stats.avg_title_chars,
            "avg_words": stats.avg_title_words,
        },
        "description": {
            "avg_chars": stats.avg_description_chars,
            "avg_words": stats.avg_description_words,
        },
        "resolution_frequency": {
            "contributor_count": irf.contributor_count,
            "mean_gap_days": {
                "avg": irf.avg_mean_gap,
                "median": irf.median_mean_gap,
                "sd": irf.sd_mean_gap,
            },
            "median_gap_days": {
                "avg": irf.avg_median_gap,
                "median": irf.median_median_gap,
                "sd": irf.sd_median_gap,
            },
        },
    }


def _write_irf_csv(dataset: corpus.Dataset, path: Path) -> None:
    gaps = corpus.resolution_gaps(dataset)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(
            ["contributor", "resolution_count", "mean_gap_days", "median_gap_days"]
        )
        for contributor in sorted(gaps):
            series = gaps[contributor]
            writer.writerow(
                [
                    contributor,
                    len(series) + 1,
                    f"{statistics.fmean(series):.6f}",
                    f"{statistics.median(series):.6f}",
                ]
            )


def cmd_ingest(args: argparse.Namespace) -> int:
    dataset = _load_input(args.input)
    stats = corpus.compute_stats(dataset)
    irf = corpus.compute_irf(dataset)
    print(f"project:      {dataset.project or '(empty)'}")
    print(f"issues:       {stats.issue_count}")
    print(f"resolved:     {stats.resolved_count}")
    print(f"unresolved:   {stats.issue_count - stats.resolved_count}")
    print(f"contributors: {stats.contributor_count}")
    print(f"period:       {_fmt_ts(stats.period_start)} .. {_fmt_ts(stats.period_end)}")
    print(
        f"title:        avg {stats.avg_title_chars:.1f} chars, "
        f"{stats.avg_title_words:.1f} words"
    )
    print(
        f"description:  avg {stats.avg_description_chars:.1f} chars, "
        f"{stats.avg_description_words:.1f} words"
    )
    if irf.contributor_count:
        print(
            f"resolution gaps ({irf.contributor_count} contributors with 2+ fixes):"
        )
        print(
            f"  mean gap days:   avg {irf.avg_mean_gap:.2f}, "
            f"median {irf.median_mean_gap:.2f}, sd {irf.sd_mean_gap:.2f}"
        )
        print(
            f"  median gap days: avg {irf.avg_median_gap:.2f}, "
            f"median {irf.median_median_gap:.2f}, sd {irf.sd_median_gap:.2f}"
        )
    else:
        print("resolution gaps: no contributor resolved 2+ issues")
    if args.output_dir:
        out = _ensure_dir(args.output_dir)
        doc = json.dumps(_stats_document(dataset, stats, irf), sort_keys=True, indent=2)
        (out / "stats.json").write_text(doc + "\n", encoding="utf-8")
        _write_irf_csv(dataset, out / "irf.csv")
        print(f"wrote {out / 'stats.json'} and {out / 'irf.csv'}")
    return EXIT_OK


def cmd_benchmark(args: argparse.Namespace) -> int:
    seed = _parse_seed(args.seed)
    thresholds = _parse_thresholds(args.thresholds)
    threads = _threads()
    grids = _load_grid_file(args.grid) if args.grid else None
    dataset = _load_input(args.input)
    kinds = SINGLE_KINDS if args.classifier == "all" else (args.classifier,)
    report = pipeline.run_benchmark(
        dataset,
        question=args.question,
        seed=seed,
        thresholds=thresholds,
        classifiers=kinds,
        grids=grids,
        metric=args.metric,
        threads=threads,
    )
    out = _ensure_dir(args.output_dir)
    pipeline.write_report_csv(report, out / "report.csv")
    pipeline.write_report_json(report, out / "report.json")
    print(
        f"benchmark: project={report.project or '(empty)'} "
        f"question={report.question} seed={report.seed} metric={report.metric}"
    )
    for row in report.rows:
        if row.error is not None:
            print(f"  {row.question_label:<7} {row.classifier:<13} failed: {row.error}")
            continue
        print(
            f"  {row.question_label:<7} {row.classifier:<13} "
            f"precision={row.mean_precision:.3f} recall={row.mean_recall:.3f} "
            f"f1={row.mean_f1:.3f} (pos={row.positive_count} neg={row.negative_count})"
        )
    print(f"wrote {out / 'report.csv'} and {out / 'report.json'}")
    return EXIT_OK


def _train_labeling(
    dataset: corpus.Dataset, question: str, raw_thresholds: str | None
) -> roles.RoleLabeling:
    if question == "rq2":
        return roles.label_rq2(dataset)
    if raw_thresholds is None:
        raise _UsageError("train with --question rq1 requires --thresholds")
    thresholds = _parse_thresholds(raw_thresholds)
    if len(thresholds) != 1:
        raise _UsageError(
            f"train needs exactly one threshold, got {len(thresholds)}"
        )
    return roles.label_rq1(dataset, thresholds[0])


def _single_cell(kind_alias: str, grid_path: str) -> pipeline.GridCell:
    kind = pipeline.KIND_ALIASES[kind_alias]
    doc = _load_grid_file(grid_path)
    axes = None
    for name, value in doc.items():
        if pipeline.KIND_ALIASES.get(name, name) == kind:
            axes = value
            break
    if axes is None:
        raise _UsageError(f"grid file has no axes for classifier {kind_alias!r}")
    cells = pipeline.expand_grid(kind, axes)
    if len(cells) != 1:
        raise _UsageError(
            f"train needs a grid naming exactly one cell, got {len(cells)}"
        )
    return cells[0]


def cmd_train(args: argparse.Namespace) -> int:
    seed = _parse_seed(args.seed)
    _threads()
    cell = _single_cell(args.classifier, args.grid)
    dataset = _load_input(args.input)
    labeling = _train_labeling(dataset, args.question, args.thresholds)
    balance_seed = pipeline.derive_seed(seed, labeling.question_label, "train-balance")
    fit_seed = pipeline.derive_seed(seed, labeling.question_label, "train-fit")
    sample, features, y = pipeline.prepare_training_sample(dataset, labeling, balance_seed)
    model = api.train(api.ModelSpec(cell.kind, cell.hyperparameters, fit_seed), features, y)
    model = dataclasses.replace(
        model,
        metadata={
            "project": dataset.project,
            "question": labeling.question,
            "threshold": labeling.threshold,
            "master_seed": seed,
            "balance_seed": balance_seed,
            "sample_size": len(sample.ids),
        },
    )
    out = _ensure_dir(args.output_dir)
    path = out / "model.json"
    api.save_model(model, path)
    print(
        f"trained {model.spec.kind} on {len(sample.ids)} balanced rows "
        f"({labeling.question_label}; vocabulary {len(model.vocabulary)} terms)"
    )
    print(f"wrote {path}")
    return EXIT_OK


def cmd_tag(args: argparse.Namespace) -> int:
    dataset = _load_input(args.input)
    model = api.load_model(args.model)
    unresolved = dataset.unresolved_issues()
    ranked = pipeline.tag_issues(model, unresolved)
    out = _ensure_dir(args.output_dir)
    path = out / "recommendations.csv"
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["issue_id", "score", "label"])
        for issue_id, prediction in ranked:
            writer.writerow([issue_id, f"{prediction.score:.6f}", prediction.label])
    recommended = sum(1 for _, p in ranked if p.label == "positive")
    print(
        f"tagged {len(ranked)} unresolved issues with {model.spec.kind}: "
        f"{recommended} recommended"
    )
    print(f"wrote {path}")
    return EXIT_OK


_COMMANDS = {
    "ingest": cmd_ingest,
    "benchmark": cmd_benchmark,
    "train": cmd_train,
    "tag": cmd_tag,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.error("a command is required (ingest, benchmark, train, tag)")
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except corpus.SchemaError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except (pipeline.PipelineError, api.TrainingError) as exc:
        print(f"pipeline error: {exc}", file=sys.stderr)
        return EXIT_PIPELINE
    except api.ArtifactError as exc:
        print(f"artifact error: {exc}", file=sys.stderr)
        return EXIT_ARTIFACT


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()

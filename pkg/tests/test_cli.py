"""Command-line behaviour: flags, exit codes, files written, reruns."""

import json

import pytest

from onboardml import cli, corpus
from onboardml.classifiers import api

import _synth


@pytest.fixture(scope="module")
def data_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("data")
    planted = _synth.planted_dataset(
        n_contributors=24, issues_each=4, seed=5, unresolved=8
    )
    corpus.save_dataset(planted, root / "issues.jsonl")

    closed_only = _synth.planted_dataset(n_contributors=12, issues_each=4, seed=6)
    corpus.save_dataset(closed_only, root / "closed.jsonl")

    (root / "bad.jsonl").write_text('{"id": "X-1"}\n', encoding="utf-8")
    (root / "notjson.jsonl").write_text("{{{{\n", encoding="utf-8")

    grid = {
        "rf": {"n_estimators": [2], "max_features": ["sqrt"]},
        "dt": {"min_samples_split": [2]},
        "gnb": {"var_smoothing": [1e-9]},
        "svm": {"C": [1.0], "epochs": [30]},
    }
    (root / "grid.json").write_text(json.dumps(grid), encoding="utf-8")
    (root / "grid2.json").write_text(
        json.dumps({"gnb": {"var_smoothing": [1e-9, 1e-7]}}), encoding="utf-8"
    )
    (root / "gridlist.json").write_text("[1, 2]", encoding="utf-8")
    (root / "gridbroken.json").write_text("{", encoding="utf-8")
    return root


class TestParsing:
    def test_thresholds_parse_and_dedupe(self):
        assert cli._parse_thresholds("1,5,10") == (1, 5, 10)
        assert cli._parse_thresholds("5,1,5") == (5, 1)
        assert cli._parse_thresholds(" 3 , 4 ") == (3, 4)

    @pytest.mark.parametrize("raw", ["", ",", "0", "-1", "x", "1,x"])
    def test_bad_thresholds(self, raw):
        with pytest.raises(cli._UsageError):
            cli._parse_thresholds(raw)

    def test_seed_bounds(self):
        assert cli._parse_seed("0") == 0
        assert cli._parse_seed(str((1 << 64) - 1)) == (1 << 64) - 1
        for raw in ["-1", str(1 << 64), "1.5", "seed"]:
            with pytest.raises(cli._UsageError):
                cli._parse_seed(raw)


class TestUsageErrors:
    def test_no_command(self, capsys):
        assert cli.main([]) == 1
        assert "command" in capsys.readouterr().err

    def test_unknown_command(self, capsys):
        assert cli.main(["frobnicate"]) == 1

    def test_missing_required_flag(self, capsys):
        assert cli.main(["ingest"]) == 1
        assert "--input" in capsys.readouterr().err

    def test_bad_choice_value(self, data_dir, tmp_path):
        code = cli.main(
            [
                "benchmark",
                "--input", str(data_dir / "issues.jsonl"),
                "--output-dir", str(tmp_path),
                "--question", "rq9",
                "--seed", "1",
            ]
        )
        assert code == 1

    def test_bad_seed_exits_one(self, data_dir, tmp_path, capsys):
        code = cli.main(
            [
                "benchmark",
                "--input", str(data_dir / "issues.jsonl"),
                "--output-dir", str(tmp_path),
                "--question", "rq1",
                "--seed", "-3",
            ]
        )
        assert code == 1
        assert "--seed" in capsys.readouterr().err

    def test_bad_thread_env_exits_one(self, data_dir, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("ONBOARD_THREADS", "zero")
        code = cli.main(
            [
                "benchmark",
                "--input", str(data_dir / "issues.jsonl"),
                "--output-dir", str(tmp_path),
                "--question", "rq1",
                "--thresholds", "1",
                "--seed", "1",
            ]
        )
        assert code == 1
        assert "ONBOARD_THREADS" in capsys.readouterr().err


class TestIngest:
    def test_valid_corpus_summary(self, data_dir, capsys):
        assert cli.main(["ingest", "--input", str(data_dir / "issues.jsonl")]) == 0
        out = capsys.readouterr().out
        assert "issues:       104" in out
        assert "resolved:     96" in out
        assert "unresolved:   8" in out
        assert "contributors: 24" in out

    def test_output_dir_files(self, data_dir, tmp_path, capsys):
        out_dir = tmp_path / "stats"
        code = cli.main(
            [
                "ingest",
                "--input", str(data_dir / "issues.jsonl"),
                "--output-dir", str(out_dir),
            ]
        )
        assert code == 0
        doc = json.loads((out_dir / "stats.json").read_text())
        assert doc["format"] == "onboardml-stats"
        assert doc["issue_count"] == 104
        assert doc["resolved_count"] == 96
        lines = (out_dir / "irf.csv").read_text().splitlines()
        assert lines[0] == "contributor,resolution_count,mean_gap_days,median_gap_days"
        assert len(lines) == 25  # header + 24 contributors with 2+ resolutions

    def test_schema_violation_exits_two(self, data_dir, capsys):
        assert cli.main(["ingest", "--input", str(data_dir / "bad.jsonl")]) == 2
        err = capsys.readouterr().err
        assert "line 1" in err

    def test_invalid_json_line_exits_two(self, data_dir):
        assert cli.main(["ingest", "--input", str(data_dir / "notjson.jsonl")]) == 2

    def test_missing_file_exits_two(self, data_dir, capsys):
        assert cli.main(["ingest", "--input", str(data_dir / "absent.jsonl")]) == 2
        assert "cannot read input file" in capsys.readouterr().err


class TestBenchmark:
    def run_benchmark(self, data_dir, out_dir, extra=()):
        return cli.main(
            [
                "benchmark",
                "--input", str(data_dir / "issues.jsonl"),
                "--output-dir", str(out_dir),
                "--question", "rq1",
                "--thresholds", "1",
                "--grid", str(data_dir / "grid.json"),
                "--seed", "7",
                *extra,
            ]
        )

    def test_single_classifier_run(self, data_dir, tmp_path, capsys):
        out_dir = tmp_path / "bench"
        assert self.run_benchmark(data_dir, out_dir, ("--classifier", "gnb")) == 0
        out = capsys.readouterr().out
        assert "question=rq1" in out
        assert "precision=" in out
        lines = (out_dir / "report.csv").read_text().splitlines()
        assert lines[0] == "project,question,threshold,classifier,precision,recall,f1,best"
        assert len(lines) == 2  # one labeling x one classifier
        assert lines[1].startswith("synthetic,rq1,1,GaussianNB,")
        doc = json.loads((out_dir / "report.json").read_text())
        assert doc["classifiers"] == ["GaussianNB"]
        assert doc["seed"] == 7
        assert len(doc["rows"][0]["runs"]) == 5

    def test_all_classifiers_row_count(self, data_dir, tmp_path):
        out_dir = tmp_path / "bench_all"
        assert self.run_benchmark(data_dir, out_dir) == 0
        lines = (out_dir / "report.csv").read_text().splitlines()
        assert len(lines) == 5  # header + 4 classifiers
        kinds = [line.split(",")[3] for line in lines[1:]]
        assert kinds == ["RandomForest", "DecisionTree", "GaussianNB", "SVM"]
        starred = [line for line in lines[1:] if line.endswith(",*")]
        assert len(starred) == 1

    def test_rerun_byte_identical(self, data_dir, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert self.run_benchmark(data_dir, a, ("--classifier", "dt")) == 0
        assert self.run_benchmark(data_dir, b, ("--classifier", "dt")) == 0
        assert (a / "report.csv").read_bytes() == (b / "report.csv").read_bytes()
        assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()

    def test_broken_grid_file_exits_three(self, data_dir, tmp_path, capsys):
        code = cli.main(
            [
                "benchmark",
                "--input", str(data_dir / "issues.jsonl"),
                "--output-dir", str(tmp_path / "x"),
                "--question", "rq1",
                "--thresholds", "1",
                "--grid", str(data_dir / "gridbroken.json"),
                "--seed", "1",
                "--classifier", "gnb",
            ]
        )
        assert code == 3
        assert "grid file" in capsys.readouterr().err

    def test_non_object_grid_exits_three(self, data_dir, tmp_path):
        code = cli.main(
            [
                "benchmark",
                "--input", str(data_dir / "issues.jsonl"),
                "--output-dir", str(tmp_path / "x"),
                "--question", "rq1",
                "--thresholds", "1",
                "--grid", str(data_dir / "gridlist.json"),
                "--seed", "1",
                "--classifier", "gnb",
            ]
        )
        assert code == 3

    def test_missing_grid_axes_fall_back_to_defaults(self, data_dir, tmp_path):
        # grid2 only constrains gnb; dt would use the big default grid, so
        # restrict the run to gnb to keep it fast
        out_dir = tmp_path / "partial"
        code = cli.main(
            [
                "benchmark",
                "--input", str(data_dir / "issues.jsonl"),
                "--output-dir", str(out_dir),
                "--question", "rq1",
                "--thresholds", "1",
                "--grid", str(data_dir / "grid2.json"),
                "--seed", "3",
                "--classifier", "gnb",
            ]
        )
        assert code == 0
        doc = json.loads((out_dir / "report.json").read_text())
        cv = doc["rows"][0]["runs"][0]["cv"]
        assert len(cv) == 2  # the two-cell gnb grid from the file

    def test_degenerate_corpus_exits_three(self, data_dir, tmp_path, capsys):
        single = _synth.planted_dataset(n_contributors=1, issues_each=5, seed=1)
        path = data_dir / "single.jsonl"
        corpus.save_dataset(single, path)
        code = cli.main(
            [
                "benchmark",
                "--input", str(path),
                "--output-dir", str(tmp_path / "x"),
                "--question", "rq1",
                "--thresholds", "1",
                "--grid", str(data_dir / "grid.json"),
                "--seed", "1",
                "--classifier", "gnb",
            ]
        )
        assert code == 3
        assert "pipeline error" in capsys.readouterr().err


class TestTrain:
    def run_train(self, data_dir, out_dir, extra=()):
        return cli.main(
            [
                "train",
                "--input", str(data_dir / "issues.jsonl"),
                "--output-dir", str(out_dir),
                "--question", "rq1",
                "--thresholds", "1",
                "--grid", str(data_dir / "grid.json"),
                "--seed", "11",
                "--classifier", "dt",
                *extra,
            ]
        )

    def test_valid_train_writes_model(self, data_dir, tmp_path, capsys):
        out_dir = tmp_path / "model"
        assert self.run_train(data_dir, out_dir) == 0
        assert "trained DecisionTree" in capsys.readouterr().out
        model = api.load_model(out_dir / "model.json")
        assert model.spec.kind == "DecisionTree"
        assert model.metadata["question"] == "rq1"
        assert model.metadata["threshold"] == 1
        assert model.metadata["master_seed"] == 11
        assert model.metadata["project"] == "synthetic"
        assert model.positive_count == model.negative_count

    def test_rerun_byte_identical(self, data_dir, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert self.run_train(data_dir, a) == 0
        assert self.run_train(data_dir, b) == 0
        assert (a / "model.json").read_bytes() == (b / "model.json").read_bytes()

    def test_rq1_needs_thresholds(self, data_dir, tmp_path, capsys):
        code = cli.main(
            [
                "train",
                "--input", str(data_dir / "issues.jsonl"),
                "--output-dir", str(tmp_path / "x"),
                "--question", "rq1",
                "--grid", str(data_dir / "grid.json"),
                "--seed", "1",
                "--classifier", "dt",
            ]
        )
        assert code == 1
        assert "--thresholds" in capsys.readouterr().err

    def test_multiple_thresholds_rejected(self, data_dir, tmp_path):
        assert self.run_train(data_dir, tmp_path / "x", ("--thresholds", "1,5")) == 1

    def test_multi_cell_grid_rejected(self, data_dir, tmp_path, capsys):
        code = cli.main(
            [
                "train",
                "--input", str(data_dir / "issues.jsonl"),
                "--output-dir", str(tmp_path / "x"),
                "--question", "rq1",
                "--thresholds", "1",
                "--grid", str(data_dir / "grid2.json"),
                "--seed", "1",
                "--classifier", "gnb",
            ]
        )
        assert code == 1
        assert "exactly one cell" in capsys.readouterr().err

    def test_grid_without_kind_axes_rejected(self, data_dir, tmp_path, capsys):
        code = cli.main(
            [
                "train",
                "--input", str(data_dir / "issues.jsonl"),
                "--output-dir", str(tmp_path / "x"),
                "--question", "rq1",
                "--thresholds", "1",
                "--grid", str(data_dir / "grid2.json"),
                "--seed", "1",
                "--classifier", "rf",
            ]
        )
        assert code == 1
        assert "no axes" in capsys.readouterr().err

    def test_single_class_labeling_exits_three(self, data_dir, tmp_path):
        # cutoff 100 marks all four issues of every contributor positive
        assert self.run_train(data_dir, tmp_path / "x", ("--thresholds", "100")) == 3

    def test_rq2_ignores_thresholds(self, data_dir, tmp_path):
        retention = _synth.retention_dataset(n_stayers=20, n_leavers=40)
        path = data_dir / "retention.jsonl"
        corpus.save_dataset(retention, path)
        out_dir = tmp_path / "rq2model"
        code = cli.main(
            [
                "train",
                "--input", str(path),
                "--output-dir", str(out_dir),
                "--question", "rq2",
                "--grid", str(data_dir / "grid.json"),
                "--seed", "2",
                "--classifier", "gnb",
            ]
        )
        assert code == 0
        model = api.load_model(out_dir / "model.json")
        assert model.metadata["question"] == "rq2"
        assert model.metadata["threshold"] is None


@pytest.fixture(scope="module")
def model_path(data_dir, tmp_path_factory):
    out_dir = tmp_path_factory.mktemp("trained")
    code = cli.main(
        [
            "train",
            "--input", str(data_dir / "issues.jsonl"),
            "--output-dir", str(out_dir),
            "--question", "rq1",
            "--thresholds", "1",
            "--grid", str(data_dir / "grid.json"),
            "--seed", "11",
            "--classifier", "dt",
        ]
    )
    assert code == 0
    return out_dir / "model.json"


class TestTag:
    def test_tag_ranks_unresolved(self, data_dir, model_path, tmp_path, capsys):
        out_dir = tmp_path / "tags"
        code = cli.main(
            [
                "tag",
                "--input", str(data_dir / "issues.jsonl"),
                "--model", str(model_path),
                "--output-dir", str(out_dir),
            ]
        )
        assert code == 0
        assert "tagged 8 unresolved issues" in capsys.readouterr().out
        lines = (out_dir / "recommendations.csv").read_text().splitlines()
        assert lines[0] == "issue_id,score,label"
        assert len(lines) == 9
        rows = [line.split(",") for line in lines[1:]]
        keys = [(-float(score), issue_id) for issue_id, score, _ in rows]
        assert keys == sorted(keys)
        for _, score, label in rows:
            expected = "positive" if float(score) > 0.5 else "negative"
            assert label == expected

    def test_no_unresolved_issues(self, data_dir, model_path, tmp_path, capsys):
        out_dir = tmp_path / "tags"
        code = cli.main(
            [
                "tag",
                "--input", str(data_dir / "closed.jsonl"),
                "--model", str(model_path),
                "--output-dir", str(out_dir),
            ]
        )
        assert code == 0
        assert "tagged 0 unresolved" in capsys.readouterr().out
        assert (out_dir / "recommendations.csv").read_text() == "issue_id,score,label\n"

    def test_tampered_model_exits_four(self, data_dir, model_path, tmp_path, capsys):
        doc = json.loads(model_path.read_text())
        doc["vocabulary_sha256"] = "f" * 64
        broken = tmp_path / "broken.json"
        broken.write_text(json.dumps(doc))
        code = cli.main(
            [
                "tag",
                "--input", str(data_dir / "issues.jsonl"),
                "--model", str(broken),
                "--output-dir", str(tmp_path / "x"),
            ]
        )
        assert code == 4
        assert "artifact error" in capsys.readouterr().err

    def test_missing_model_exits_four(self, data_dir, tmp_path):
        code = cli.main(
            [
                "tag",
                "--input", str(data_dir / "issues.jsonl"),
                "--model", str(tmp_path / "absent.json"),
                "--output-dir", str(tmp_path / "x"),
            ]
        )
        assert code == 4

    def test_missing_input_exits_two(self, data_dir, model_path, tmp_path):
        code = cli.main(
            [
                "tag",
                "--input", str(data_dir / "absent.jsonl"),
                "--model", str(model_path),
                "--output-dir", str(tmp_path / "x"),
            ]
        )
        assert code == 2


def test_entrypoint_propagates_exit_code(monkeypatch):
    monkeypatch.setattr("sys.argv", ["onboard"])
    with pytest.raises(SystemExit) as info:
        cli.entrypoint()
    assert info.value.code == 1

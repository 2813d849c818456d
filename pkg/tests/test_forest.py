"""Random forest: bootstrap wiring, vote math, threading equivalence."""

import random

import numpy as np
import pytest
import scipy.sparse as sp

from onboardml.classifiers import forest, kernels, tree

U64_MOD = 1 << 64


def sparse_dataset(rng, n, d, informative=0):
    rows = []
    y = []
    for i in range(n):
        label = rng.randrange(2)
        row = [rng.choice([0.0, 0.0, 0.0, 1.0, 2.0]) for _ in range(d)]
        if informative:
            row[0] = float(label) * 2.0 + rng.random() * 0.2
        rows.append(row)
        y.append(label)
    X = np.asarray(rows, dtype=np.float64)
    return tree.canonical_csc(X), tree.canonical_csr(X), np.array(y, dtype=np.int64)


class TestSingleTreeEquivalence:
    def test_one_tree_forest_matches_manual_tree_fit(self):
        rng = random.Random(19)
        X_csc, X_csr, y = sparse_dataset(rng, 35, 5)
        master = 424242
        grown = forest.fit(X_csc, y, n_estimators=1, max_features="all", seed=master)

        t_seed = int(forest.tree_seeds(master, 1)[0])
        samples = kernels.draw_bootstrap(np.uint64(t_seed), 35)
        grow_state = (t_seed + 35 * kernels.GOLD_INT) % U64_MOD
        manual = tree.fit(
            X_csc, y, criterion="gini", splitter="best", max_features="all",
            min_samples_split=2, min_samples_leaf=1,
            seed=grow_state, sample_rows=np.asarray(samples),
        )
        for field in ("feature", "threshold", "left", "right", "positive", "negative"):
            assert np.array_equal(getattr(grown, field), getattr(manual, field))
        assert grown.offsets.tolist() == [0, manual.node_count]

    def test_column_subsampling_path_matches_too(self):
        rng = random.Random(23)
        X_csc, X_csr, y = sparse_dataset(rng, 30, 9)
        master = 7
        grown = forest.fit(X_csc, y, n_estimators=1, max_features="sqrt", seed=master)

        t_seed = int(forest.tree_seeds(master, 1)[0])
        samples = kernels.draw_bootstrap(np.uint64(t_seed), 30)
        grow_state = (t_seed + 30 * kernels.GOLD_INT) % U64_MOD
        manual = tree.fit(
            X_csc, y, max_features="sqrt",
            seed=grow_state, sample_rows=np.asarray(samples),
        )
        assert np.array_equal(grown.feature, manual.feature)
        assert np.array_equal(grown.threshold, manual.threshold)


class TestVoteMath:
    def test_hand_stacked_stumps_give_exact_fraction(self):
        # ten leaf-only trees: seven vote positive, three negative
        n = 10
        positive = np.array([3] * 7 + [1] * 3, dtype=np.int64)
        negative = np.array([1] * 7 + [3] * 3, dtype=np.int64)
        stacked = forest.ForestNodes(
            feature=np.full(n, -1, dtype=np.int64),
            threshold=np.zeros(n, dtype=np.float64),
            left=np.full(n, -1, dtype=np.int64),
            right=np.full(n, -1, dtype=np.int64),
            positive=positive,
            negative=negative,
            offsets=np.arange(n + 1, dtype=np.int64),
        )
        X = tree.canonical_csr(np.array([[0.0], [5.0]]))
        scores = forest.vote_scores(stacked, X)
        assert scores.tolist() == [0.7, 0.7]
        assert stacked.n_trees == 10

    def test_scores_are_vote_fractions(self):
        rng = random.Random(2)
        X_csc, X_csr, y = sparse_dataset(rng, 40, 4)
        grown = forest.fit(X_csc, y, n_estimators=7, seed=3)
        scores = forest.vote_scores(grown, X_csr)
        assert ((scores >= 0.0) & (scores <= 1.0)).all()
        votes = scores * 7
        assert np.array_equal(votes, np.round(votes))

    def test_tie_leaf_votes_negative(self):
        stacked = forest.ForestNodes(
            feature=np.array([-1], dtype=np.int64),
            threshold=np.zeros(1),
            left=np.array([-1], dtype=np.int64),
            right=np.array([-1], dtype=np.int64),
            positive=np.array([2], dtype=np.int64),
            negative=np.array([2], dtype=np.int64),
            offsets=np.array([0, 1], dtype=np.int64),
        )
        X = tree.canonical_csr(np.array([[1.0]]))
        assert forest.vote_scores(stacked, X).tolist() == [0.0]


class TestStoredVersusTransient:
    def test_both_paths_identical(self):
        rng = random.Random(11)
        X_csc, X_csr, y = sparse_dataset(rng, 50, 6, informative=1)
        _, X_val, _ = sparse_dataset(random.Random(99), 20, 6)
        for trees_n in (1, 5, 16):
            grown = forest.fit(X_csc, y, n_estimators=trees_n, seed=88)
            stored = forest.vote_scores(grown, X_val)
            transient = forest.transient_vote_scores(
                X_csc, y, X_val, n_estimators=trees_n, max_features="auto", seed=88
            )
            assert np.array_equal(stored, transient)

    def test_chunked_threads_match_sequential(self):
        rng = random.Random(14)
        X_csc, X_csr, y = sparse_dataset(rng, 45, 5, informative=1)
        _, X_val, _ = sparse_dataset(random.Random(15), 12, 5)
        seq = forest.transient_vote_scores(
            X_csc, y, X_val, n_estimators=9, max_features="sqrt", seed=5, threads=1
        )
        par = forest.transient_vote_scores(
            X_csc, y, X_val, n_estimators=9, max_features="sqrt", seed=5, threads=3
        )
        assert np.array_equal(seq, par)

        grown_seq = forest.fit(X_csc, y, n_estimators=9, seed=5, threads=1)
        grown_par = forest.fit(X_csc, y, n_estimators=9, seed=5, threads=4)
        for field in ("feature", "threshold", "left", "right", "offsets"):
            assert np.array_equal(getattr(grown_seq, field), getattr(grown_par, field))


class TestBehaviour:
    def test_learns_planted_signal(self):
        rng = random.Random(47)
        X_csc, X_csr, y = sparse_dataset(rng, 120, 8, informative=1)
        grown = forest.fit(X_csc, y, n_estimators=25, seed=1)
        scores = forest.vote_scores(grown, X_csr)
        predicted = (scores > 0.5).astype(np.int64)
        assert (predicted == y).mean() >= 0.95

    def test_deterministic_across_fits(self):
        rng = random.Random(21)
        X_csc, _, y = sparse_dataset(rng, 30, 5)
        a = forest.fit(X_csc, y, n_estimators=6, seed=77)
        b = forest.fit(X_csc, y, n_estimators=6, seed=77)
        for field in ("feature", "threshold", "left", "right",
                      "positive", "negative", "offsets"):
            assert np.array_equal(getattr(a, field), getattr(b, field))

    def test_different_seeds_differ(self):
        rng = random.Random(22)
        X_csc, _, y = sparse_dataset(rng, 40, 6)
        a = forest.fit(X_csc, y, n_estimators=4, seed=1)
        b = forest.fit(X_csc, y, n_estimators=4, seed=2)
        assert not (
            a.offsets.tolist() == b.offsets.tolist()
            and np.array_equal(a.threshold, b.threshold)
        )

    def test_tree_seeds_are_stable_and_distinct(self):
        seeds = forest.tree_seeds(123, 50)
        again = forest.tree_seeds(123, 50)
        assert np.array_equal(seeds, again)
        assert len(set(seeds.tolist())) == 50


class TestThreadCount:
    def test_absent_means_one(self, monkeypatch):
        monkeypatch.delenv("ONBOARD_THREADS", raising=False)
        assert forest.thread_count() == 1

    def test_valid_value(self, monkeypatch):
        monkeypatch.setenv("ONBOARD_THREADS", "4")
        assert forest.thread_count() == 4

    @pytest.mark.parametrize("bad", ["0", "-2", "three", "2.5", ""])
    def test_invalid_values_rejected(self, monkeypatch, bad):
        monkeypatch.setenv("ONBOARD_THREADS", bad)
        with pytest.raises(ValueError):
            forest.thread_count()


def test_bootstrap_draws_are_in_range_and_seeded():
    samples = np.asarray(kernels.draw_bootstrap(np.uint64(9), 100))
    assert samples.shape == (100,)
    assert ((samples >= 0) & (samples < 100)).all()
    again = np.asarray(kernels.draw_bootstrap(np.uint64(9), 100))
    assert np.array_equal(samples, again)
    other = np.asarray(kernels.draw_bootstrap(np.uint64(10), 100))
    assert not np.array_equal(samples, other)

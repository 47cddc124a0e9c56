import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import blob_dataset
from leafage.core import LocalSurrogate
from leafage.data import SplitSpec, generate_artificial, train_test_split
from leafage.errors import DataError, NoEnemiesError
from leafage.evaluation import (
    FidelityConfig,
    FidelitySummary,
    auc,
    bold_flags,
    fidelity_sphere,
    format_mean_std,
    local_fidelity,
    results_table,
    run_setting,
    wilcoxon_signed_rank,
    write_results_csv,
)


def auc_bruteforce(labels, scores):
    """Quadratic concordance-counting oracle."""
    labels = np.asarray(labels, dtype=bool)
    pos = np.asarray(scores, float)[labels]
    neg = np.asarray(scores, float)[~labels]
    grid_pos = pos[:, None]
    concordant = (grid_pos > neg).sum() + 0.5 * (grid_pos == neg).sum()
    return concordant / (pos.size * neg.size)


class TestAuc:
    def test_perfectly_separated(self):
        assert auc([0, 0, 1, 1], [0.1, 0.2, 0.8, 0.9]) == 1.0

    def test_reversed_ranking(self):
        assert auc([0, 0, 1, 1], [0.9, 0.8, 0.2, 0.1]) == 0.0

    def test_hand_counted_pairs(self):
        # pos scores {0.8, 0.6} vs neg {0.7, 0.5}: 3 of 4 pairs concordant
        assert auc([1, 0, 1, 0], [0.8, 0.7, 0.6, 0.5]) == 0.75

    def test_constant_scores_half(self):
        assert auc([1, 0, 1, 0], [3.0, 3.0, 3.0, 3.0]) == 0.5

    def test_single_class_rejected(self):
        with pytest.raises(DataError, match="positive and one negative"):
            auc([1, 1, 1], [0.1, 0.2, 0.3])

    def test_matches_bruteforce_with_ties(self):
        rng = np.random.default_rng(0)
        for _ in range(300):
            n = int(rng.integers(2, 120))
            labels = rng.integers(0, 2, size=n)
            if labels.min() == labels.max():
                continue
            # coarse grid forces plenty of ties
            scores = rng.integers(0, 6, size=n).astype(float)
            assert auc(labels, scores) == pytest.approx(
                auc_bruteforce(labels, scores), abs=1e-12
            )

    @given(st.integers(min_value=0, max_value=10_000))
    @settings(max_examples=100, deadline=None)
    def test_invariant_under_monotone_transform(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(4, 50))
        labels = np.concatenate([[0, 1], rng.integers(0, 2, size=n - 2)])
        scores = rng.normal(size=n)
        base = auc(labels, scores)
        assert auc(labels, 3.0 * scores + 7.0) == pytest.approx(base, abs=1e-12)
        assert auc(labels, np.exp(scores)) == pytest.approx(base, abs=1e-12)

    @given(st.integers(min_value=0, max_value=10_000))
    @settings(max_examples=100, deadline=None)
    def test_negation_complement_without_ties(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(4, 60))
        labels = np.concatenate([[0, 1], rng.integers(0, 2, size=n - 2)])
        scores = rng.permutation(n).astype(float)  # distinct scores
        assert auc(labels, scores) + auc(labels, -scores) == pytest.approx(
            1.0, abs=1e-12
        )


def wilcoxon_enumeration_oracle(diff):
    """Exhaustive two-sided p over all sign patterns of the actual ranks."""
    diff = np.asarray(diff, float)
    diff = diff[diff != 0]
    n = diff.size
    absd = np.abs(diff)
    order = np.argsort(absd, kind="stable")
    ranks = np.empty(n)
    sorted_abs = absd[order]
    i = 0
    while i < n:
        j = i
        while j < n and sorted_abs[j] == sorted_abs[i]:
            j += 1
        ranks[order[i:j]] = (i + j + 1) / 2.0
        i = j
    observed = ranks[diff > 0].sum()
    totals = [
        sum(r for r, s in zip(ranks, signs) if s)
        for signs in itertools.product([0, 1], repeat=n)
    ]
    totals = np.asarray(totals)
    p_le = np.mean(totals <= observed)
    p_ge = np.mean(totals >= observed)
    return min(1.0, 2 * min(p_le, p_ge))


class TestWilcoxon:
    def test_identical_vectors_inconclusive(self):
        a = np.arange(10.0)
        result = wilcoxon_signed_rank(a, a)
        assert result.inconclusive
        assert result.p_value is None

    def test_fewer_than_six_nonzero(self):
        a = np.array([1.0, 2.0, 3.0, 4.0, 5.0, 6.0])
        b = a + np.array([0.0, 0.0, 0.1, -0.2, 0.3, 0.4])  # 4 non-zero
        assert wilcoxon_signed_rank(a, b).inconclusive

    def test_n6_all_positive_exact(self):
        a = np.array([2.0, 3.0, 4.0, 5.0, 6.0, 7.0])
        b = np.array([1.0, 1.0, 1.0, 1.0, 1.0, 1.0])
        result = wilcoxon_signed_rank(a, b)
        assert result.statistic == 21.0
        # exact two-sided p is 2/64; also satisfies the looser +-0.015
        # normal-approximation contract
        assert result.p_value == pytest.approx(0.03125, abs=1e-12)
        assert abs(result.p_value - 0.03125) <= 0.015

    def test_matches_enumeration_oracle_small_n(self):
        rng = np.random.default_rng(1)
        for _ in range(120):
            n = int(rng.integers(6, 13))
            a = rng.normal(size=n)
            b = rng.normal(size=n)
            if rng.uniform() < 0.4:  # force tied |differences|
                b = a - rng.integers(-2, 3, size=n).astype(float)
            diff = a - b
            if (diff != 0).sum() < 6:
                continue
            result = wilcoxon_signed_rank(a, b)
            assert result.p_value == pytest.approx(
                wilcoxon_enumeration_oracle(diff), abs=0.01
            )

    def test_normal_path_against_scipy(self):
        scipy_stats = pytest.importorskip("scipy.stats")
        rng = np.random.default_rng(2)
        for _ in range(40):
            n = int(rng.integers(30, 80))
            a = rng.normal(size=n)
            b = a - rng.normal(loc=0.2, size=n)
            result = wilcoxon_signed_rank(a, b)
            assert result.method == "normal"
            reference = scipy_stats.wilcoxon(
                a, b, zero_method="wilcox", correction=False, method="approx"
            )
            assert result.p_value == pytest.approx(reference.pvalue, abs=1e-9)

    def test_length_mismatch(self):
        with pytest.raises(DataError):
            wilcoxon_signed_rank(np.zeros(3), np.zeros(4))


class TestFidelitySphere:
    def line_geometry(self, n_enemies=20, n_allies=5):
        # center at origin; enemies at x = 1..n_enemies; allies tucked close
        enemies = np.column_stack(
            [np.arange(1.0, n_enemies + 1), np.zeros(n_enemies)]
        )
        allies = np.column_stack(
            [np.full(n_allies, 0.25), np.linspace(-0.2, 0.2, n_allies)]
        )
        features = np.vstack([[0.0, 0.0], allies, enemies])
        predicted = np.array([1] * (1 + n_allies) + [0] * n_enemies)
        return features, predicted

    def test_radius_is_19th_nearest_enemy(self):
        features, predicted = self.line_geometry()
        sphere = fidelity_sphere(features, predicted, 0, 0.95)
        dist = np.linalg.norm(features[sphere], axis=1)
        enemy_dist = dist[predicted[sphere] == 0]
        assert enemy_dist.max() == 19.0  # ceil(0.95 * 20) = 19
        assert len(enemy_dist) == 19
        assert 0 not in sphere

    def test_p_near_one_includes_all_enemies(self):
        features, predicted = self.line_geometry()
        sphere = fidelity_sphere(features, predicted, 0, 0.999)
        assert (predicted[sphere] == 0).sum() == 20

    def test_single_enemy(self):
        features, predicted = self.line_geometry(n_enemies=1)
        sphere = fidelity_sphere(features, predicted, 0, 0.95)
        assert (predicted[sphere] == 0).sum() == 1  # ceil(0.95 * 1) = 1

    def test_no_enemy_raises(self):
        features = np.random.default_rng(0).normal(size=(5, 2))
        with pytest.raises(NoEnemiesError):
            fidelity_sphere(features, np.ones(5, dtype=int), 0, 0.95)

    def test_shrinking_p_shrinks_sphere(self):
        rng = np.random.default_rng(3)
        features = rng.normal(size=(60, 2))
        predicted = rng.integers(0, 2, size=60)
        previous = None
        for p in (0.95, 0.7, 0.4, 0.2):
            sphere = set(fidelity_sphere(features, predicted, 4, p).tolist())
            if previous is not None:
                assert sphere <= previous
            previous = sphere

    def test_allies_inside_radius_included(self):
        features, predicted = self.line_geometry()
        sphere = fidelity_sphere(features, predicted, 0, 0.95)
        assert (predicted[sphere] == 1).sum() == 5  # all allies are close

    @given(st.integers(min_value=0, max_value=10_000))
    @settings(max_examples=100, deadline=None)
    def test_sphere_always_contains_an_enemy(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(3, 80))
        features = rng.normal(size=(n, 2))
        predicted = rng.integers(0, 2, size=n)
        z = int(rng.integers(0, n))
        enemies_exist = np.any(predicted[np.arange(n) != z] != predicted[z])
        if not enemies_exist:
            with pytest.raises(NoEnemiesError):
                fidelity_sphere(features, predicted, z, 0.95)
            return
        sphere = fidelity_sphere(features, predicted, z, 0.95)
        assert np.any(predicted[sphere] != predicted[z])
        assert z not in sphere

    def test_enemy_share_rule(self):
        features, predicted = self.line_geometry()
        sphere = fidelity_sphere(features, predicted, 0, 0.6, rule="enemy-share")
        inside = predicted[sphere]
        assert (inside == 0).mean() >= 0.6
        # unattainable share falls back to every other row
        sphere_all = fidelity_sphere(features, predicted, 0, 0.99, rule="enemy-share")
        assert len(sphere_all) == len(features) - 1


class TestLocalFidelity:
    def test_perfect_ranking(self):
        s = LocalSurrogate(weights=np.array([1.0, 0.0]), intercept=0.0)
        rows = np.array([[2.0, 0.0], [1.0, 0.0], [-1.0, 0.0], [-2.0, 0.0]])
        labels = np.array([1, 1, 0, 0])
        assert local_fidelity(s, labels, rows) == 1.0

    def test_constant_scores_half(self):
        s = LocalSurrogate(
            weights=np.zeros(2), intercept=1.0, degenerate=True
        )
        rows = np.random.default_rng(0).normal(size=(10, 2))
        labels = np.array([0, 1] * 5)
        assert local_fidelity(s, labels, rows) == 0.5

    def test_single_class_sphere_skipped(self):
        s = LocalSurrogate(weights=np.ones(2), intercept=0.0)
        rows = np.zeros((4, 2))
        assert local_fidelity(s, np.ones(4, dtype=int), rows) is None


class TestRunSetting:
    def test_baseline_exactly_half(self):
        ds = generate_artificial(60, seed=0)
        train, test = train_test_split(ds, SplitSpec(seed=0))
        (summary,) = run_setting(train, test, "knn", ("baseline",))
        assert summary.mean == 0.5
        assert summary.stddev == 0.0
        assert summary.n_skipped == 0

    def test_leafage_on_separable_blobs(self):
        ds = blob_dataset(n_per_class=80, seed=1)
        train, test = train_test_split(ds, SplitSpec(seed=1))
        (summary,) = run_setting(train, test, "svm", ("leafage",))
        assert summary.mean >= 0.99

    def test_identical_seeds_identical_summaries(self):
        ds = generate_artificial(50, seed=2)
        train, test = train_test_split(ds, SplitSpec(seed=2))
        a = run_setting(train, test, "dt", ("leafage", "lime"), model_seed=3)
        b = run_setting(train, test, "dt", ("leafage", "lime"), model_seed=3)
        for x, y in zip(a, b):
            assert np.array_equal(
                x.per_instance_auc, y.per_instance_auc, equal_nan=True
            )
            assert x.mean == y.mean

    def test_unknown_strategy(self):
        ds = generate_artificial(20, seed=0)
        train, test = train_test_split(ds, SplitSpec(seed=0))
        with pytest.raises(DataError, match="unknown strategy"):
            run_setting(train, test, "knn", ("magic",))

    def test_setting_tuple(self):
        ds = generate_artificial(30, seed=1)
        train, test = train_test_split(ds, SplitSpec(seed=1))
        (summary,) = run_setting(train, test, "lda", ("baseline",))
        assert summary.setting == ("ad", "B", "lda", "baseline")


def synthetic_summary(setting, values):
    return FidelitySummary.from_scores(setting, np.asarray(values, dtype=float))


class TestResultsTable:
    def test_single_strategy_bold(self):
        s = synthetic_summary(("d", "c", "m", "leafage"), np.linspace(0.7, 0.9, 30))
        flags = bold_flags([s])
        assert flags[s.setting]

    def test_baseline_not_bold_against_better_strategy(self):
        rng = np.random.default_rng(0)
        baseline = synthetic_summary(("d", "c", "m", "baseline"), np.full(50, 0.5))
        better = synthetic_summary(
            ("d", "c", "m", "leafage"), np.clip(rng.normal(0.75, 0.1, 50), 0, 1)
        )
        flags = bold_flags([better, baseline])
        assert flags[better.setting]
        assert not flags[baseline.setting]

    def test_equal_vectors_both_bold(self):
        values = np.linspace(0.6, 0.8, 40)
        a = synthetic_summary(("d", "c", "m", "leafage"), values)
        b = synthetic_summary(("d", "c", "m", "lime"), values.copy())
        flags = bold_flags([a, b])
        assert flags[a.setting] and flags[b.setting]

    def test_formatting_rule(self):
        assert format_mean_std(0.9994, 0.0003) == "99.9 (0.0)"
        assert format_mean_std(0.5, 0.0) == "50.0 (0.0)"
        assert format_mean_std(float("nan"), float("nan")) == "n/a"

    def test_table_marks_bold(self):
        rng = np.random.default_rng(1)
        rows = [
            synthetic_summary(("d", "c", "m", "lime"), np.clip(rng.normal(0.9, 0.05, 40), 0, 1)),
            synthetic_summary(("d", "c", "m", "baseline"), np.full(40, 0.5)),
        ]
        table = results_table(rows)
        assert "**" in table
        assert "50.0 (0.0)" in table
        assert table.count("**") == 2  # only the winner is wrapped

    def test_csv_output(self, tmp_path):
        rows = [
            synthetic_summary(("d", "c", "m", "leafage"), np.linspace(0.6, 0.9, 20)),
            synthetic_summary(("d", "c", "m", "baseline"), np.full(20, 0.5)),
        ]
        path = tmp_path / "results.csv"
        write_results_csv(rows, str(path))
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "setting,strategy,mean_auc,std_auc,n,n_skipped,bold"
        assert lines[1].startswith("d|c|m,leafage,")
        assert lines[2].startswith("d|c|m,baseline,0.5,0.0,20,0,")

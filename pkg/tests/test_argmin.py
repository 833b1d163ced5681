import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from splitargmin import (
    DomainError,
    SelectorKind,
    bonferroni_test,
    normal_cdf,
    normal_quantile,
    paired_statistics,
    split_sample,
    split_test,
    studentized_statistic,
)


@pytest.fixture
def gaussian_sample():
    rng = np.random.default_rng(99)
    return rng.normal([0.0, 0.05, 0.4], 1.0, size=(60, 3))


class TestSplitSample:
    def test_deterministic_partition(self, gaussian_sample):
        a = split_sample(gaussian_sample, 7)
        b = split_sample(gaussian_sample, 7)
        assert np.array_equal(a.d1, b.d1)
        assert np.array_equal(a.d2, b.d2)
        assert a.seed == 7

    def test_floor_rule_on_odd_rows(self):
        rng = np.random.default_rng(1)
        view = split_sample(rng.normal(size=(5, 2)), 0)
        assert view.d1.shape[0] == 2
        assert view.d2.shape[0] == 3

    def test_partition_preserves_rows(self, gaussian_sample):
        view = split_sample(gaussian_sample, 3)
        combined = np.vstack([view.d1, view.d2])
        original = gaussian_sample[np.lexsort(gaussian_sample.T)]
        recovered = combined[np.lexsort(combined.T)]
        assert np.array_equal(original, recovered)

    def test_seeds_differ(self, gaussian_sample):
        a = split_sample(gaussian_sample, 0)
        b = split_sample(gaussian_sample, 1)
        assert not np.array_equal(a.d1, b.d1)

    def test_too_few_rows(self):
        with pytest.raises(DomainError):
            split_sample(np.zeros((3, 2)), 0)


class TestStudentizedStatistic:
    def test_hand_computed(self):
        # contrasts r minus s of [1, 2, 0, 3]: mean 1.5, variance 5/3,
        # statistic sqrt(4) * 1.5 / sqrt(5/3) = 2.3238
        d1 = np.column_stack([[1.0, 2.0, 0.0, 3.0], np.zeros(4)])
        stat = studentized_statistic(d1, 1, 2)
        assert stat == pytest.approx(2.3238, abs=1e-4)
        # and 2.3238 clears the default 5% cutoff of 1.6449
        assert stat > normal_quantile(0.95)

    def test_identical_columns_give_zero(self):
        col = np.array([0.4, -1.0, 2.2])
        d1 = np.column_stack([col, col])
        assert studentized_statistic(d1, 1, 2) == 0.0

    def test_constant_positive_gap_is_inf(self):
        col = np.array([0.4, -1.0, 2.2])
        d1 = np.column_stack([col + 2.0, col])
        assert studentized_statistic(d1, 1, 2) == math.inf
        assert studentized_statistic(d1, 2, 1) == -math.inf

    def test_index_validation(self):
        d1 = np.zeros((4, 3))
        with pytest.raises(DomainError):
            studentized_statistic(d1, 1, 1)
        with pytest.raises(DomainError):
            studentized_statistic(d1, 1, 4)

    def test_needs_two_rows(self):
        with pytest.raises(DomainError):
            studentized_statistic(np.zeros((1, 2)), 1, 2)

    def test_monotone_in_target_shift(self):
        rng = np.random.default_rng(4)
        d1 = rng.normal(size=(12, 3))
        shifts = [0.0, 0.1, 0.5, 1.0, 4.0]
        stats = []
        for c in shifts:
            bumped = d1.copy()
            bumped[:, 0] += c
            stats.append(studentized_statistic(bumped, 1, 3))
        assert all(a < b for a, b in zip(stats, stats[1:]))


class TestSplitTest:
    def test_fields_and_threshold(self, gaussian_sample):
        out = split_test(gaussian_sample, 3, 0.05, SelectorKind("adjusted"), 11)
        assert out.threshold == pytest.approx(normal_quantile(0.95), abs=1e-12)
        assert out.p_value == pytest.approx(1.0 - normal_cdf(out.statistic), abs=1e-12)
        assert out.reject is (out.statistic > out.threshold)
        assert out.seed == 11
        assert out.selected in (1, 2)
        assert out.alpha == 0.05

    def test_statistic_recomputable_from_parts(self, gaussian_sample):
        from splitargmin import select

        seed = 5
        out = split_test(gaussian_sample, 2, 0.1, SelectorKind("plugin"), seed)
        view = split_sample(gaussian_sample, seed)
        s_hat = select(view.d2, 2, SelectorKind("plugin"))
        assert s_hat == out.selected
        assert studentized_statistic(view.d1, 2, s_hat) == pytest.approx(out.statistic)

    def test_strong_signal_rejects(self, gaussian_sample):
        out = split_test(gaussian_sample, 3, 0.05, SelectorKind("adjusted"), 0)
        assert out.reject and out.statistic > 1.6449

    def test_alpha_near_one_always_rejects(self, gaussian_sample):
        out = split_test(gaussian_sample, 1, 1.0 - 1e-12, SelectorKind("plugin"), 2)
        assert out.reject

    def test_alpha_validation(self, gaussian_sample):
        for alpha in (0.0, 1.0, -0.3):
            with pytest.raises(DomainError):
                split_test(gaussian_sample, 1, alpha, SelectorKind(), 0)

    def test_reject_consistent_with_p_value(self):
        rng = np.random.default_rng(21)
        for trial in range(40):
            data = rng.normal(size=(24, 4))
            alpha = rng.uniform(0.02, 0.5)
            out = split_test(data, 1, alpha, SelectorKind("adjusted"), trial)
            if abs(out.statistic - out.threshold) > 1e-6:
                assert out.reject == (out.p_value < alpha)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10_000), st.sampled_from(["plugin", "adjusted"]))
    def test_determinism(self, seed, base):
        rng = np.random.default_rng(77)
        data = rng.normal(size=(30, 4))
        a = split_test(data, 2, 0.05, SelectorKind(base), seed)
        b = split_test(data, 2, 0.05, SelectorKind(base), seed)
        assert a == b


class TestPairedStatistics:
    def test_target_slot_is_minus_inf(self, gaussian_sample):
        stats = paired_statistics(gaussian_sample, 2)
        assert stats[1] == -math.inf
        assert np.isfinite(np.delete(stats, 1)).all()

    def test_matches_scalar_contrasts(self, gaussian_sample):
        stats = paired_statistics(gaussian_sample, 1)
        n = gaussian_sample.shape[0]
        for k in (2, 3):
            diffs = gaussian_sample[:, 0] - gaussian_sample[:, k - 1]
            expected = math.sqrt(n) * diffs.mean() / diffs.std(ddof=1)
            assert stats[k - 1] == pytest.approx(expected, rel=1e-12)


class TestBonferroni:
    def test_two_columns_is_single_z_test(self):
        rng = np.random.default_rng(6)
        data = rng.normal([0.5, 0.0], 1.0, size=(80, 2))
        out = bonferroni_test(data, 1, 0.05)
        diffs = data[:, 0] - data[:, 1]
        stat = math.sqrt(80) * diffs.mean() / diffs.std(ddof=1)
        assert out.statistic == pytest.approx(stat, rel=1e-12)
        assert out.threshold == pytest.approx(normal_quantile(0.95), abs=1e-12)
        assert out.p_value == pytest.approx(1.0 - normal_cdf(stat), abs=1e-12)
        assert out.selected == 2
        assert out.seed is None

    def test_identical_columns_never_reject(self):
        col = np.linspace(-1, 1, 12)
        data = np.column_stack([col, col, col])
        out = bonferroni_test(data, 1, 0.4)
        assert out.statistic == 0.0
        assert not out.reject

    def test_correction_scales_with_d(self):
        rng = np.random.default_rng(13)
        data = rng.normal(size=(50, 6))
        out = bonferroni_test(data, 1, 0.05)
        assert out.threshold == pytest.approx(normal_quantile(1 - 0.05 / 5), abs=1e-12)
        stats = paired_statistics(data, 1)
        top = int(np.argmax(stats)) + 1
        assert out.selected == top
        assert out.p_value == pytest.approx(
            min(1.0, 5 * (1.0 - normal_cdf(np.max(stats)))), abs=1e-12
        )

    def test_p_value_capped_at_one(self):
        rng = np.random.default_rng(14)
        data = rng.normal([0.0, 5.0, 5.0, 5.0], 0.1, size=(30, 4))
        out = bonferroni_test(data, 1, 0.05)
        assert out.p_value == 1.0
        assert not out.reject

    def test_conservative_on_wide_tied_null(self):
        # with 100 tied columns the union bound overshoots, so the rejection
        # rate should land strictly under nominal at every level; one p-value
        # per draw covers all the levels at once since reject iff p < alpha
        rng = np.random.default_rng(21)
        reps = 2000
        pvals = np.array(
            [bonferroni_test(rng.normal(size=(500, 100)), 1, 0.05).p_value for _ in range(reps)]
        )
        for alpha in (0.05, 0.1, 0.25, 0.5):
            assert np.mean(pvals < alpha) < alpha

"""Synthetic generators, Weibull sampling, CSV ingestion, CV splits."""

import math

import numpy as np
import pytest

from gradtree.data import (
    SYNTH_KINDS,
    CsvSchema,
    Dataset,
    SynthSpec,
    apply_censoring,
    expected_time_formula,
    generate_synthetic,
    kfold_split,
    load_csv,
    save_csv,
    weibull_event_times,
)
from gradtree.errors import CsvFormatError


def single_row_formula(kind, x, weights=None):
    """Scalar re-implementation used as an independent check."""
    x = np.asarray(x, dtype=float)
    if kind == "friedman1":
        return (
            10 * math.sin(math.pi * x[0] * x[1])
            + 20 * (x[2] - 0.5) ** 2
            + 10 * x[3]
            + 5 * x[4]
        )
    if kind == "friedman2":
        return math.sqrt(x[0] ** 2 + (x[1] * x[2] - 1 / (x[1] * x[3])) ** 2)
    if kind == "friedman3":
        return math.atan((x[1] * x[2] - 1 / (x[1] * x[3])) / x[0])
    if kind == "strong_interactions":
        total = 0.0
        pos = 0
        for i in range(x.size):
            for j in range(i + 1, x.size):
                total += weights[pos] * x[i] * x[j]
                pos += 1
        return total
    if kind == "sparse_features":
        return float(np.dot(x, weights))
    if kind == "nonlinear":
        return (
            4 * math.sin(x[0])
            + math.log(abs(x[1]) + 1)
            + x[2] ** 2
            + math.exp(0.5 * x[3])
            + math.tanh(x[4])
        )
    raise AssertionError(kind)


class TestFormulas:
    def test_friedman1_hand_value(self):
        x = np.full((1, 5), 0.5)
        got = expected_time_formula("friedman1", x)[0]
        assert got == pytest.approx(10 * math.sin(math.pi / 4) + 7.5, abs=1e-12)
        assert got == pytest.approx(14.5710678, abs=1e-6)

    def test_friedman3_zero(self):
        # choose x2*x3 == 1/(x2*x4): arctan(0) = 0
        x2, x4 = 200.0, 2.0
        x3 = 1.0 / (x2 * x2 * x4)
        x = np.array([[10.0, x2, x3, x4]])
        assert expected_time_formula("friedman3", x)[0] == pytest.approx(0.0, abs=1e-15)

    def test_strong_interactions_zero_weights(self):
        X = np.random.default_rng(69).uniform(0, 1, (10, 5))
        y = expected_time_formula("strong_interactions", X, np.zeros(10))
        np.testing.assert_array_equal(y, np.zeros(10))

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            expected_time_formula("friedman4", np.ones((1, 5)))


class TestGenerators:
    @pytest.mark.parametrize("kind", SYNTH_KINDS)
    def test_formula_reevaluated_per_sample(self, kind):
        sample = generate_synthetic(SynthSpec(kind=kind, n_samples=40, rng_seed=1))
        assert np.all(np.isfinite(sample.X))
        assert np.all(sample.expected >= 0.1 - 1e-12)
        for i in range(40):
            direct = single_row_formula(kind, sample.X[i], sample.weights)
            assert sample.expected[i] == pytest.approx(direct + sample.offset, rel=1e-12)

    @pytest.mark.parametrize("kind", SYNTH_KINDS)
    def test_deterministic_under_seed(self, kind):
        a = generate_synthetic(SynthSpec(kind=kind, n_samples=25, rng_seed=3))
        b = generate_synthetic(SynthSpec(kind=kind, n_samples=25, rng_seed=3))
        np.testing.assert_array_equal(a.X, b.X)
        np.testing.assert_array_equal(a.time, b.time)
        np.testing.assert_array_equal(a.event, b.event)
        c = generate_synthetic(SynthSpec(kind=kind, n_samples=25, rng_seed=4))
        assert not np.array_equal(a.X, c.X)

    def test_friedman1_needs_no_offset(self):
        sample = generate_synthetic(SynthSpec(kind="friedman1", n_samples=200, rng_seed=5))
        assert sample.offset == 0.0

    def test_friedman3_gets_offset(self):
        # arctan output is negative for half its range, so a shift applies
        sample = generate_synthetic(SynthSpec(kind="friedman3", n_samples=200, rng_seed=6))
        assert sample.offset > 0.0
        assert sample.expected.min() == pytest.approx(0.1, abs=1e-12)

    def test_friedman2_ranges(self):
        sample = generate_synthetic(SynthSpec(kind="friedman2", n_samples=500, rng_seed=7))
        X = sample.X
        assert X.shape[1] == 4
        assert 0 <= X[:, 0].min() and X[:, 0].max() <= 100
        assert 40 * np.pi <= X[:, 1].min() and X[:, 1].max() <= 560 * np.pi
        assert 0 <= X[:, 2].min() and X[:, 2].max() <= 1
        assert 1 <= X[:, 3].min() and X[:, 3].max() <= 11

    def test_sparsity_fraction(self):
        sample = generate_synthetic(
            SynthSpec(kind="sparse_features", n_samples=10_000, rng_seed=8)
        )
        frac = float(np.mean(sample.X == 0.0))
        assert abs(frac - 0.7) < 0.01

    def test_dataset_views(self):
        sample = generate_synthetic(SynthSpec(kind="friedman1", n_samples=30, rng_seed=9))
        reg = sample.regression_dataset()
        np.testing.assert_array_equal(reg.y, sample.expected)
        noisy = sample.regression_dataset(observed=True)
        np.testing.assert_array_equal(noisy.y, sample.time)
        surv = sample.survival_dataset()
        np.testing.assert_array_equal(surv.time, sample.time)
        np.testing.assert_array_equal(surv.event, sample.event)

    def test_invalid_specs(self):
        with pytest.raises(ValueError):
            SynthSpec(kind="friedman9", n_samples=5).validate()
        with pytest.raises(ValueError):
            SynthSpec(kind="friedman1", n_samples=0).validate()
        with pytest.raises(ValueError):
            SynthSpec(kind="friedman1", n_samples=5, weibull_k=0.0).validate()
        with pytest.raises(ValueError):
            SynthSpec(kind="friedman1", n_samples=5, censor_event_prob=1.5).validate()


class TestWeibull:
    def test_unit_uniform_draw(self):
        # u = e^-1 makes (-log u)^(1/k) = 1 for every k

        class FixedRng:
            def uniform(self, low=0.0, high=1.0, size=None):
                return np.full(size, math.exp(-1.0))

        for k in (0.5, 1.0, 5.0):
            y = np.array([2.0, 7.0])
            t = weibull_event_times(y, k, FixedRng())
            np.testing.assert_allclose(t, y / math.gamma(1 + 1 / k), rtol=1e-12)

    def test_mean_matches_expected_time(self):
        rng = np.random.default_rng(10)
        y = np.full(100_000, 3.0)
        t = weibull_event_times(y, 5.0, rng)
        assert abs(t.mean() - 3.0) / 3.0 < 0.01

    def test_variance_shrinks_with_shape(self):
        rng = np.random.default_rng(11)
        y = np.ones(10_000)
        spread_low = np.var(weibull_event_times(y, 2.0, rng))
        spread_high = np.var(weibull_event_times(y, 50.0, rng))
        assert spread_high < spread_low / 10

    def test_nonpositive_y_rejected(self):
        rng = np.random.default_rng(12)
        with pytest.raises(ValueError):
            weibull_event_times(np.array([1.0, 0.0]), 5.0, rng)
        with pytest.raises(ValueError):
            weibull_event_times(np.array([1.0]), -1.0, rng)


class TestCensoring:
    def test_prob_one_all_observed(self):
        rng = np.random.default_rng(13)
        events = apply_censoring(np.ones(500), 1.0, rng)
        assert events.min() == 1

    def test_binomial_fraction(self):
        rng = np.random.default_rng(14)
        events = apply_censoring(np.ones(100_000), 0.8, rng)
        assert abs(events.mean() - 0.8) < 0.01

    def test_reproducible(self):
        a = apply_censoring(np.ones(100), 0.5, np.random.default_rng(15))
        b = apply_censoring(np.ones(100), 0.5, np.random.default_rng(15))
        np.testing.assert_array_equal(a, b)

    def test_bad_prob(self):
        with pytest.raises(ValueError):
            apply_censoring(np.ones(5), 0.0, np.random.default_rng(16))


class TestCsv:
    def test_regression_roundtrip(self, tmp_path):
        rng = np.random.default_rng(17)
        ds = Dataset(X=rng.normal(size=(7, 3)), task="regression", y=rng.normal(size=7))
        path = tmp_path / "reg.csv"
        save_csv(ds, path)
        back = load_csv(path, CsvSchema(task="regression"))
        np.testing.assert_array_equal(back.X, ds.X)
        np.testing.assert_array_equal(back.y, ds.y)
        assert back.feature_names == ds.feature_names

    def test_three_row_regression(self, tmp_path):
        path = tmp_path / "tiny.csv"
        path.write_text("x1,x2,y\n1,2,3\n4,5,6\n7,8,9\n")
        ds = load_csv(path, CsvSchema(task="regression"))
        assert ds.n_samples == 3
        np.testing.assert_array_equal(ds.y, [3.0, 6.0, 9.0])

    def test_classification_roundtrip_preserves_class_values(self, tmp_path):
        path = tmp_path / "cls.csv"
        path.write_text("x1,y\n0.1,cat\n0.2,dog\n0.3,cat\n")
        ds = load_csv(path, CsvSchema(task="classification"))
        assert ds.class_values == ["cat", "dog"]
        np.testing.assert_array_equal(ds.y, [0, 1, 0])
        out = tmp_path / "cls2.csv"
        save_csv(ds, out)
        again = load_csv(out, CsvSchema(task="classification"))
        np.testing.assert_array_equal(again.y, ds.y)
        assert again.class_values == ds.class_values

    def test_numeric_class_values_sort_numerically(self, tmp_path):
        path = tmp_path / "cls.csv"
        path.write_text("x1,y\n0.1,10\n0.2,2\n0.3,10\n")
        ds = load_csv(path, CsvSchema(task="classification"))
        assert ds.class_values == ["2", "10"]
        np.testing.assert_array_equal(ds.y, [1, 0, 1])

    def test_survival_roundtrip(self, tmp_path):
        rng = np.random.default_rng(18)
        ds = Dataset(
            X=rng.normal(size=(6, 2)),
            task="survival",
            time=rng.uniform(1, 5, 6),
            event=rng.integers(0, 2, 6),
        )
        path = tmp_path / "surv.csv"
        save_csv(ds, path)
        back = load_csv(path, CsvSchema(task="survival"))
        np.testing.assert_array_equal(back.time, ds.time)
        np.testing.assert_array_equal(back.event, ds.event)

    def test_bad_cell_names_row_and_column(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("x1,x2,x3,y\n1,2,3,4\n1,2,oops,4\n")
        with pytest.raises(CsvFormatError, match=r"row 2, column 'x3'"):
            load_csv(path, CsvSchema(task="regression"))

    def test_bad_event_flag(self, tmp_path):
        path = tmp_path / "surv.csv"
        path.write_text("x1,time,event\n1,2,1\n1,3,2\n")
        with pytest.raises(CsvFormatError, match="event must be 0 or 1"):
            load_csv(path, CsvSchema(task="survival"))

    def test_missing_target_column(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("x1,x2\n1,2\n")
        with pytest.raises(CsvFormatError, match="missing required columns"):
            load_csv(path, CsvSchema(task="regression"))

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(CsvFormatError, match="empty"):
            load_csv(path, CsvSchema(task="regression"))

    def test_header_only(self, tmp_path):
        path = tmp_path / "h.csv"
        path.write_text("x1,y\n")
        with pytest.raises(CsvFormatError, match="no data rows"):
            load_csv(path, CsvSchema(task="regression"))

    def test_ragged_row(self, tmp_path):
        path = tmp_path / "r.csv"
        path.write_text("x1,x2,y\n1,2,3\n4,5\n")
        with pytest.raises(CsvFormatError, match="row 2"):
            load_csv(path, CsvSchema(task="regression"))

    def test_float_fidelity(self, tmp_path):
        vals = np.array([0.1, 1 / 3, math.pi, 1e-17, 123456.789012345])
        ds = Dataset(X=vals[:, None], task="regression", y=vals)
        path = tmp_path / "f.csv"
        save_csv(ds, path)
        back = load_csv(path, CsvSchema(task="regression"))
        np.testing.assert_array_equal(back.X[:, 0], vals)
        np.testing.assert_array_equal(back.y, vals)


class TestKfold:
    def test_ten_by_five(self):
        folds = kfold_split(10, 5, rng_seed=0)
        assert len(folds) == 5
        all_test = np.concatenate([test for _, test in folds])
        assert sorted(all_test.tolist()) == list(range(10))
        for train, test in folds:
            assert test.size == 2
            assert train.size == 8
            assert np.intersect1d(train, test).size == 0

    def test_uneven_sizes(self):
        folds = kfold_split(11, 3, rng_seed=1)
        sizes = sorted(test.size for _, test in folds)
        assert sizes == [3, 4, 4]

    def test_deterministic(self):
        a = kfold_split(20, 4, rng_seed=2)
        b = kfold_split(20, 4, rng_seed=2)
        for (tr1, te1), (tr2, te2) in zip(a, b):
            np.testing.assert_array_equal(tr1, tr2)
            np.testing.assert_array_equal(te1, te2)

    def test_bad_k(self):
        with pytest.raises(ValueError):
            kfold_split(5, 6)
        with pytest.raises(ValueError):
            kfold_split(5, 1)


class TestDataset:
    def test_default_feature_names(self):
        ds = Dataset(X=np.ones((2, 3)), task="regression", y=np.ones(2))
        assert ds.feature_names == ["x1", "x2", "x3"]

    def test_subset(self):
        rng = np.random.default_rng(19)
        ds = Dataset(X=rng.normal(size=(10, 2)), task="regression", y=rng.normal(size=10))
        sub = ds.subset(np.array([1, 3, 5]))
        assert sub.n_samples == 3
        np.testing.assert_array_equal(sub.y, ds.y[[1, 3, 5]])

    def test_validation(self):
        with pytest.raises(ValueError):
            Dataset(X=np.ones((2, 2)), task="regression")
        with pytest.raises(ValueError):
            Dataset(X=np.ones((2, 2)), task="survival", time=np.ones(2))
        with pytest.raises(ValueError):
            Dataset(X=np.ones((2, 2)), task="ranking", y=np.ones(2))
        with pytest.raises(ValueError):
            Dataset(X=np.full((2, 2), np.inf), task="regression", y=np.ones(2))

import itertools

import numpy as np
import pytest

from tmclin.errors import DataError
from tmclin.evaluation import (
    ConfusionMatrix,
    compute_metrics,
    evaluate_model,
    stratified_kfold,
    stratified_split,
)


def oracle_metrics(preds, labels):
    """Brute-force reference: pure-python counting over each class."""
    n = len(labels)
    correct = sum(1 for p, t in zip(preds, labels) if p == t)
    accuracy = correct / n
    per_class = {}
    for c in (0, 1):
        tp = sum(1 for p, t in zip(preds, labels) if p == c and t == c)
        fp = sum(1 for p, t in zip(preds, labels) if p == c and t != c)
        fn = sum(1 for p, t in zip(preds, labels) if p != c and t == c)
        precision = tp / (tp + fp) if tp + fp > 0 else 0.0
        recall = tp / (tp + fn) if tp + fn > 0 else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
        per_class[c] = (precision, recall, f1)
    macro = tuple(
        (per_class[0][i] + per_class[1][i]) / 2 for i in range(3)
    )
    return accuracy, per_class, macro


class TestComputeMetrics:
    def test_perfect_predictions(self):
        report = compute_metrics([1, 0, 1, 0], [1, 0, 1, 0])
        assert report.accuracy == 1.0
        assert report.macro_precision == 1.0
        assert report.macro_recall == 1.0
        assert report.macro_f1 == 1.0

    def test_hand_computed_macro_f1(self):
        # labels [1,1,0,0], preds [1,0,1,0]: each class has p=r=f1=0.5
        report = compute_metrics([1, 0, 1, 0], [1, 1, 0, 0])
        assert report.macro_f1 == pytest.approx(0.5)
        assert report.accuracy == pytest.approx(0.5)

    def test_degenerate_all_positive_on_all_negative(self):
        report = compute_metrics([1, 1, 1], [0, 0, 0])
        assert report.accuracy == 0.0
        assert report.macro_f1 == 0.0  # zero-denominator rule, no crash

    def test_exhaustive_oracle_all_256_patterns(self):
        labels = [1, 1, 1, 0, 0, 0, 1, 0]
        for bits in itertools.product((0, 1), repeat=8):
            preds = list(bits)
            report = compute_metrics(preds, labels)
            accuracy, per_class, macro = oracle_metrics(preds, labels)
            assert report.accuracy == accuracy
            for c in (0, 1):
                assert report.per_class[c].precision == per_class[c][0]
                assert report.per_class[c].recall == per_class[c][1]
                assert report.per_class[c].f1 == per_class[c][2]
            assert report.macro_precision == macro[0]
            assert report.macro_recall == macro[1]
            assert report.macro_f1 == macro[2]

    def test_confusion_counts(self):
        report = compute_metrics([1, 1, 0, 0], [1, 0, 1, 0])
        assert report.confusion == ConfusionMatrix(tp=1, fp=1, tn=1, fn=1)
        assert report.confusion.total == 4

    def test_length_mismatch(self):
        with pytest.raises(DataError):
            compute_metrics([1, 0], [1])

    def test_empty(self):
        with pytest.raises(DataError):
            compute_metrics([], [])


class TestStratifiedSplit:
    def test_paper_scale_counts(self):
        y = np.array([1] * 132 + [0] * 198)
        train, test = stratified_split(y, 0.2, seed=0)
        assert len(test) == 66
        assert int(y[test].sum()) in (26, 27)
        assert len(train) + len(test) == 330

    def test_tiny_balanced(self):
        y = np.array([0, 0, 1, 1])
        train, test = stratified_split(y, 0.5, seed=1)
        assert len(train) == len(test) == 2
        assert int(y[test].sum()) == 1
        assert int(y[train].sum()) == 1

    def test_determinism(self):
        y = np.array([0] * 20 + [1] * 10)
        a = stratified_split(y, 0.3, seed=9)
        b = stratified_split(y, 0.3, seed=9)
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])
        c = stratified_split(y, 0.3, seed=10)
        assert not np.array_equal(a[1], c[1])

    def test_partition_over_many_seeds(self):
        rng = np.random.default_rng(0)
        y = rng.integers(0, 2, 97)
        y[:2] = [0, 1]
        everything = set(range(97))
        for seed in range(100):
            train, test = stratified_split(y, 0.25, seed)
            assert set(train) | set(test) == everything
            assert set(train) & set(test) == set()

    def test_stratification_bound(self):
        rng = np.random.default_rng(1)
        for seed in range(50):
            n = int(rng.integers(20, 200))
            y = (rng.random(n) < 0.4).astype(np.int64)
            if y.sum() < 2 or (n - y.sum()) < 2:
                continue
            train, test = stratified_split(y, 0.2, seed)
            if len(test) == 0:
                continue
            overall = y.mean()
            test_fraction = y[test].mean()
            assert abs(test_fraction - overall) <= 1.0 / len(test) + 1e-12

    def test_small_class_rejected(self):
        with pytest.raises(DataError):
            stratified_split(np.array([0, 0, 0, 1]), 0.5, 0)

    def test_single_class_rejected(self):
        with pytest.raises(DataError):
            stratified_split(np.array([1, 1, 1, 1]), 0.5, 0)

    def test_bad_fraction(self):
        with pytest.raises(DataError):
            stratified_split(np.array([0, 0, 1, 1]), 1.0, 0)


class TestStratifiedKFold:
    def test_partition_and_balance(self):
        y = np.array([1] * 40 + [0] * 60)
        folds = stratified_kfold(y, k=5, seed=3)
        assert len(folds) == 5
        all_test = np.concatenate([test for _, test in folds])
        assert sorted(all_test.tolist()) == list(range(100))
        for train, test in folds:
            assert set(train) & set(test) == set()
            assert abs(y[test].mean() - 0.4) < 0.1

    def test_determinism(self):
        y = np.array([0] * 30 + [1] * 20)
        a = stratified_kfold(y, 5, seed=2)
        b = stratified_kfold(y, 5, seed=2)
        for (ta, va), (tb, vb) in zip(a, b):
            assert np.array_equal(ta, tb) and np.array_equal(va, vb)

    def test_too_few_members(self):
        with pytest.raises(DataError):
            stratified_kfold(np.array([0, 0, 0, 1, 1]), k=3)


def test_evaluate_model_delegates():
    X = np.zeros((4, 2), dtype=bool)
    y = np.array([1, 0, 1, 0])
    report = evaluate_model(lambda data: np.array([1, 0, 1, 0]), X, y)
    assert report.accuracy == 1.0

"""Stratified splitting and classification metrics (accuracy, per-class and
macro-averaged precision/recall/F1)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DataError


@dataclass(frozen=True)
class ConfusionMatrix:
    """Binary confusion counts with class 1 (recurrence) as positive."""

    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @classmethod
    def from_predictions(cls, preds: np.ndarray, labels: np.ndarray) -> "ConfusionMatrix":
        return cls(
            tp=int(((preds == 1) & (labels == 1)).sum()),
            fp=int(((preds == 1) & (labels == 0)).sum()),
            tn=int(((preds == 0) & (labels == 0)).sum()),
            fn=int(((preds == 0) & (labels == 1)).sum()),
        )

    def to_json_dict(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn}


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float

    def to_json_dict(self) -> dict:
        return {"precision": self.precision, "recall": self.recall, "f1": self.f1}


@dataclass(frozen=True)
class MetricsReport:
    """Accuracy plus per-class and macro-averaged precision/recall/F1.

    Macro values are the unweighted mean of the two per-class values;
    zero-denominator precision/recall/F1 are defined as 0 so degenerate
    predictors evaluate without errors.
    """

    accuracy: float
    per_class: tuple[ClassMetrics, ClassMetrics]
    macro_precision: float
    macro_recall: float
    macro_f1: float
    confusion: ConfusionMatrix

    def to_json_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "class_0": self.per_class[0].to_json_dict(),
            "class_1": self.per_class[1].to_json_dict(),
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
            "confusion": self.confusion.to_json_dict(),
        }


def _safe_div(num: int, den: int) -> float:
    return num / den if den > 0 else 0.0


def compute_metrics(preds: Sequence[int] | np.ndarray, labels: Sequence[int] | np.ndarray) -> MetricsReport:
    preds = np.asarray(preds, dtype=np.int64)
    labels = np.asarray(labels, dtype=np.int64)
    if preds.shape != labels.shape:
        raise DataError(f"preds shape {preds.shape} != labels shape {labels.shape}")
    if preds.shape[0] == 0:
        raise DataError("metrics require at least one prediction")
    n = preds.shape[0]
    accuracy = int((preds == labels).sum()) / n
    per_class = []
    for c in (0, 1):
        tp = int(((preds == c) & (labels == c)).sum())
        fp = int(((preds == c) & (labels != c)).sum())
        fn = int(((preds != c) & (labels == c)).sum())
        precision = _safe_div(tp, tp + fp)
        recall = _safe_div(tp, tp + fn)
        f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
        per_class.append(ClassMetrics(precision, recall, f1))
    return MetricsReport(
        accuracy=accuracy,
        per_class=(per_class[0], per_class[1]),
        macro_precision=(per_class[0].precision + per_class[1].precision) / 2,
        macro_recall=(per_class[0].recall + per_class[1].recall) / 2,
        macro_f1=(per_class[0].f1 + per_class[1].f1) / 2,
        confusion=ConfusionMatrix.from_predictions(preds, labels),
    )


def stratified_split(
    y: Sequence[int] | np.ndarray, test_fraction: float, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Seeded per-class split into (train indices, test indices).

    Each class contributes round(count * test_fraction) test members via a
    seeded within-class shuffle; the result is a disjoint, exhaustive
    partition with both sides returned in ascending index order.
    """
    y = np.asarray(y, dtype=np.int64)
    if not 0.0 < test_fraction < 1.0:
        raise DataError(f"test fraction must lie in (0, 1), got {test_fraction}")
    classes = np.unique(y)
    if len(classes) < 2:
        raise DataError("stratified split requires both classes present")
    rng = np.random.default_rng(seed)
    train_idx: list[np.ndarray] = []
    test_idx: list[np.ndarray] = []
    for c in classes:
        members = np.flatnonzero(y == c)
        if members.shape[0] < 2:
            raise DataError(f"class {c} has fewer than 2 members")
        perm = rng.permutation(members)
        k = round(members.shape[0] * test_fraction)
        test_idx.append(perm[:k])
        train_idx.append(perm[k:])
    return np.sort(np.concatenate(train_idx)), np.sort(np.concatenate(test_idx))


def stratified_kfold(
    y: Sequence[int] | np.ndarray, k: int = 5, seed: int = 0
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Seeded stratified k-fold partition: class members are shuffled once
    and dealt round-robin into folds."""
    y = np.asarray(y, dtype=np.int64)
    if k < 2:
        raise DataError(f"k-fold requires k >= 2, got {k}")
    classes = np.unique(y)
    if len(classes) < 2:
        raise DataError("stratified k-fold requires both classes present")
    rng = np.random.default_rng(seed)
    fold_members: list[list[int]] = [[] for _ in range(k)]
    for c in classes:
        members = rng.permutation(np.flatnonzero(y == c))
        if members.shape[0] < k:
            raise DataError(f"class {c} has fewer members than folds")
        for i, idx in enumerate(members):
            fold_members[i % k].append(int(idx))
    splits = []
    for fold in range(k):
        test = np.sort(np.array(fold_members[fold], dtype=np.int64))
        train = np.sort(
            np.concatenate([np.array(fold_members[f], dtype=np.int64) for f in range(k) if f != fold])
        )
        splits.append((train, test))
    return splits


def evaluate_model(
    predict_fn: Callable[[np.ndarray], np.ndarray], X: np.ndarray, y: np.ndarray
) -> MetricsReport:
    """Run a predictor over a dataset and score it."""
    return compute_metrics(predict_fn(X), y)

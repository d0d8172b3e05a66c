"""Clinical and statistical comparators: the EORTC recurrence risk score
and an L2-regularised, class-weighted logistic regression on raw bits."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import DataError, NotTrainedError, SchemaError
from .schema import PatientRecord

# EORTC recurrence points, transcribed from the published six-factor
# additive scoring tables (total 0..17).
COUNT_BANDS = ("single", "2-7", ">=8")
COUNT_POINTS = {"single": 0, "2-7": 3, ">=8": 6}
SIZE_BANDS = ("<3cm", ">=3cm")
SIZE_POINTS = {"<3cm": 0, ">=3cm": 3}
PRIOR_BANDS = ("primary", "le1_per_year", "gt1_per_year")
PRIOR_POINTS = {"primary": 0, "le1_per_year": 2, "gt1_per_year": 4}
T_CATEGORIES = ("Ta", "T1")
T_POINTS = {"Ta": 0, "T1": 1}
GRADES = ("G1", "G2", "G3")
GRADE_POINTS = {"G1": 0, "G2": 1, "G3": 2}

# Risk groups by total score: 0, 1-4, 5-9, 10-17.
RISK_GROUP_UPPER_BOUNDS = (0, 4, 9, 17)
RISK_GROUP_LABELS = ("0", "1-4", "5-9", "10-17")

# Classification threshold: predict recurrence at the 5-9 group and above.
DEFAULT_OPERATING_THRESHOLD = 2


@dataclass(frozen=True)
class EORTCFactors:
    """The six recurrence factors of the published tables."""

    tumour_count_band: str
    size_band: str
    prior_recurrence: str
    t_category: str
    cis: bool
    grade: str

    def __post_init__(self) -> None:
        checks = (
            ("tumour_count_band", self.tumour_count_band, COUNT_BANDS),
            ("size_band", self.size_band, SIZE_BANDS),
            ("prior_recurrence", self.prior_recurrence, PRIOR_BANDS),
            ("t_category", self.t_category, T_CATEGORIES),
            ("grade", self.grade, GRADES),
        )
        for field_name, value, allowed in checks:
            if value not in allowed:
                raise SchemaError(f"EORTC {field_name}: {value!r} not in {allowed}")
        if not isinstance(self.cis, bool):
            raise SchemaError(f"EORTC cis must be boolean, got {self.cis!r}")


@dataclass(frozen=True)
class EORTCResult:
    score: int
    risk_group: int

    @property
    def risk_group_label(self) -> str:
        return RISK_GROUP_LABELS[self.risk_group]


def eortc_recurrence_score(factors: EORTCFactors) -> EORTCResult:
    """Sum of the six factor points, banded into the four risk groups."""
    score = (
        COUNT_POINTS[factors.tumour_count_band]
        + SIZE_POINTS[factors.size_band]
        + PRIOR_POINTS[factors.prior_recurrence]
        + T_POINTS[factors.t_category]
        + (1 if factors.cis else 0)
        + GRADE_POINTS[factors.grade]
    )
    group = next(i for i, upper in enumerate(RISK_GROUP_UPPER_BOUNDS) if score <= upper)
    return EORTCResult(score=score, risk_group=group)


def eortc_predict(result: EORTCResult, operating_threshold: int = DEFAULT_OPERATING_THRESHOLD) -> int:
    """1 (recurrence) iff the risk group reaches the operating threshold."""
    if not 0 <= operating_threshold < len(RISK_GROUP_LABELS):
        raise DataError(f"operating threshold must be a group index 0..3, got {operating_threshold}")
    return 1 if result.risk_group >= operating_threshold else 0


# Column mapping used to ingest EORTC factors from the shared data CSV.
EORTC_COLUMNS = ("TumourNumber", "TumourSizeCm", "PriorRecurrenceRate", "TCategory", "CIS", "Grade")


def eortc_factors_from_record(record: PatientRecord) -> EORTCFactors:
    """Build factors from a record's columns.

    Mapping: TumourNumber <=1 -> single, 2..7 -> 2-7, else >=8;
    TumourSizeCm < 3 -> <3cm else >=3cm; PriorRecurrenceRate, TCategory and
    Grade are taken verbatim; CIS accepts booleans or 0/1/true/false text.
    """
    values = record.values
    missing = [c for c in EORTC_COLUMNS if c not in values]
    if missing:
        raise DataError(f"EORTC mapping: missing columns {missing}")
    count = float(values["TumourNumber"])  # type: ignore[arg-type]
    count_band = "single" if count <= 1 else ("2-7" if count <= 7 else ">=8")
    size_band = "<3cm" if float(values["TumourSizeCm"]) < 3.0 else ">=3cm"  # type: ignore[arg-type]
    cis_raw = values["CIS"]
    if isinstance(cis_raw, bool):
        cis = cis_raw
    elif str(cis_raw).strip().lower() in ("1", "true"):
        cis = True
    elif str(cis_raw).strip().lower() in ("0", "false"):
        cis = False
    else:
        raise DataError(f"EORTC mapping: CIS value {cis_raw!r} is not a truth value")
    return EORTCFactors(
        tumour_count_band=count_band,
        size_band=size_band,
        prior_recurrence=str(values["PriorRecurrenceRate"]),
        t_category=str(values["TCategory"]),
        cis=cis,
        grade=str(values["Grade"]),
    )


def eortc_predict_dataset(
    records: Sequence[PatientRecord], operating_threshold: int = DEFAULT_OPERATING_THRESHOLD
) -> np.ndarray:
    preds = [
        eortc_predict(eortc_recurrence_score(eortc_factors_from_record(r)), operating_threshold)
        for r in records
    ]
    return np.array(preds, dtype=np.int64)


# ---------------------------------------------------------------------------
# Logistic regression baseline


@dataclass(frozen=True)
class LRParams:
    """Full-batch gradient descent settings; deterministic from zero init.

    ``class_weights`` follows the same convention as the TM: (weight for
    label 0, weight for label 1), None meaning balanced n/(2*n_c).
    """

    l2: float = 1e-3
    learning_rate: float = 0.1
    iterations: int = 2000
    class_weights: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        if self.l2 < 0:
            raise DataError("l2 strength must be >= 0")
        if self.learning_rate <= 0:
            raise DataError("learning rate must be positive")
        if self.iterations < 0:
            raise DataError("iterations must be >= 0")


@dataclass
class LRModel:
    """Weights over the B raw bits (negated bits are linear complements and
    are dropped to avoid perfect collinearity), plus an unregularised bias."""

    weights: np.ndarray
    bias: float
    params: LRParams
    class_weights: tuple[float, float]
    trained: bool = False


def _raw_half(X: np.ndarray) -> np.ndarray:
    if X.ndim != 2 or X.shape[1] % 2 != 0:
        raise DataError("expected a (n, 2B) literal matrix")
    return X[:, : X.shape[1] // 2].astype(np.float64)


def lr_loss_and_gradient(
    weights: np.ndarray,
    bias: float,
    X_raw: np.ndarray,
    y: np.ndarray,
    l2: float,
    class_weights: tuple[float, float],
) -> tuple[float, np.ndarray, float]:
    """Mean class-weighted logistic loss plus l2*||w||^2 (bias excluded),
    with its analytic gradient."""
    n = X_raw.shape[0]
    z = X_raw @ weights + bias
    sample_weights = np.where(y == 1, class_weights[1], class_weights[0])
    # log(1 + e^z) - y*z, computed stably
    losses = np.logaddexp(0.0, z) - y * z
    loss = float((sample_weights * losses).sum() / n + l2 * float(weights @ weights))
    residual = sample_weights * (1.0 / (1.0 + np.exp(-z)) - y)
    grad_w = X_raw.T @ residual / n + 2.0 * l2 * weights
    grad_b = float(residual.sum() / n)
    return loss, grad_w, grad_b


def lr_fit(X: np.ndarray, y: np.ndarray, params: LRParams = LRParams()) -> LRModel:
    """Minimise the weighted logistic loss by full-batch gradient descent
    on the raw-bit half of the literal matrix."""
    if X.shape[0] == 0:
        raise DataError("lr_fit requires non-empty data")
    y = np.asarray(y, dtype=np.float64)
    if len(np.unique(y)) < 2:
        raise DataError("lr_fit requires both classes present")
    X_raw = _raw_half(X)
    if params.class_weights is not None:
        class_weights = params.class_weights
    else:
        n = y.shape[0]
        n_pos = float(y.sum())
        class_weights = (n / (2.0 * (n - n_pos)), n / (2.0 * n_pos))
    weights = np.zeros(X_raw.shape[1], dtype=np.float64)
    bias = 0.0
    for _ in range(params.iterations):
        _, grad_w, grad_b = lr_loss_and_gradient(weights, bias, X_raw, y, params.l2, class_weights)
        weights -= params.learning_rate * grad_w
        bias -= params.learning_rate * grad_b
    return LRModel(weights=weights, bias=bias, params=params, class_weights=class_weights, trained=True)


def lr_predict(model: LRModel, x: np.ndarray) -> tuple[int, float]:
    """(label, probability of recurrence); labels split at 0.5, ties up."""
    if not model.trained:
        raise NotTrainedError("lr_predict requires a trained model")
    x_raw = np.asarray(x, dtype=np.float64)[: model.weights.shape[0]]
    prob = float(1.0 / (1.0 + np.exp(-(model.weights @ x_raw + model.bias))))
    return (1 if prob >= 0.5 else 0), prob


def lr_predict_dataset(model: LRModel, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if not model.trained:
        raise NotTrainedError("lr_predict requires a trained model")
    X_raw = _raw_half(X)
    probs = 1.0 / (1.0 + np.exp(-(X_raw @ model.weights + model.bias)))
    return (probs >= 0.5).astype(np.int64), probs

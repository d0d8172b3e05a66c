"""Seeded random search over TM hyperparameters with an
interpretability-penalised objective.

Each trial samples (n_bins, num_clauses, T, s, epochs) uniformly from the
declared candidate sets, rebinarizes the data under the matching cut-off
ladder variant, trains a fresh model, and scores
macro-F1 - penalty * included_literals / (num_clauses * 2B). All trial
parameters are drawn up front from one master generator and each trial
trains under its own derived seed, so the log is reproducible and trials
are independent.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DataError
from .evaluation import MetricsReport, compute_metrics
from .schema import FeatureSchema, PatientRecord, binarize_dataset
from .tm import TMModel, TMParams, fit, predict_dataset

DEFAULT_COMPLEXITY_PENALTY = 0.05


@dataclass(frozen=True)
class SearchSpace:
    """Candidate sets; n_bins selects among the schema's declared cut-off
    ladders (features without a ladder of that size keep their defaults)."""

    n_bins: tuple[int, ...] = (1, 2, 3)
    num_clauses: tuple[int, ...] = (20, 40, 80, 120)
    T: tuple[int, ...] = (10, 20, 38, 60)
    s: tuple[float, ...] = (2.0, 3.0, 4.0, 6.0)
    epochs: tuple[int, ...] = (25, 50, 100)

    def __post_init__(self) -> None:
        for name in ("n_bins", "num_clauses", "T", "s", "epochs"):
            if not getattr(self, name):
                raise DataError(f"search space field {name} must be non-empty")

    def to_json_dict(self) -> dict:
        return {
            "n_bins": list(self.n_bins),
            "num_clauses": list(self.num_clauses),
            "T": list(self.T),
            "s": list(self.s),
            "epochs": list(self.epochs),
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "SearchSpace":
        return cls(
            n_bins=tuple(int(v) for v in doc.get("n_bins", cls.n_bins)),
            num_clauses=tuple(int(v) for v in doc.get("num_clauses", cls.num_clauses)),
            T=tuple(int(v) for v in doc.get("T", cls.T)),
            s=tuple(float(v) for v in doc.get("s", cls.s)),
            epochs=tuple(int(v) for v in doc.get("epochs", cls.epochs)),
        )


@dataclass
class TrialResult:
    """One trial's sampled parameters and score; ``params`` degrades to the
    raw sampled dict when the combination was itself invalid."""

    index: int
    n_bins: int
    params: TMParams | dict
    metrics: MetricsReport | None
    complexity: int
    objective: float
    error: str | None = None

    def to_json_dict(self) -> dict:
        params = self.params.to_json_dict() if isinstance(self.params, TMParams) else dict(self.params)
        return {
            "index": self.index,
            "n_bins": self.n_bins,
            "params": params,
            "metrics": None if self.metrics is None else self.metrics.to_json_dict(),
            "complexity": self.complexity,
            "objective": self.objective,
            "error": self.error,
        }


@dataclass
class SearchResult:
    best: TrialResult
    trials: list[TrialResult] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "best_index": self.best.index,
            "trials": [t.to_json_dict() for t in self.trials],
        }


def _trial_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def random_search(
    space: SearchSpace,
    trials: int,
    schema: FeatureSchema,
    train_records: Sequence[PatientRecord],
    validation_records: Sequence[PatientRecord],
    seed: int,
    complexity_penalty: float = DEFAULT_COMPLEXITY_PENALTY,
) -> SearchResult:
    """Uniform random search; the best trial wins by objective with
    first-seen tie-break. A failed trial is logged with objective -inf and
    does not abort the study."""
    if trials < 1:
        raise DataError(f"trials must be >= 1, got {trials}")
    rng = np.random.default_rng(seed)
    sampled = []
    for index in range(trials):
        sampled.append(
            (
                int(rng.choice(space.n_bins)),
                int(rng.choice(space.num_clauses)),
                int(rng.choice(space.T)),
                float(rng.choice(space.s)),
                int(rng.choice(space.epochs)),
            )
        )

    results: list[TrialResult] = []
    for index, (n_bins, num_clauses, T, s, epochs) in enumerate(sampled):
        try:
            params = TMParams(
                num_clauses=num_clauses, T=T, s=s, epochs=epochs, seed=_trial_seed(seed, index)
            )
            variant = schema.with_n_bins(n_bins)
            X_train, y_train = binarize_dataset(train_records, variant)
            X_val, y_val = binarize_dataset(validation_records, variant)
            model = TMModel.initialize(variant, params)
            fit(model, X_train, y_train)
            metrics = compute_metrics(predict_dataset(model, X_val), y_val)
            complexity = model.included_literal_count()
            normalised = complexity / (params.num_clauses * model.n_literals)
            objective = metrics.macro_f1 - complexity_penalty * normalised
            results.append(TrialResult(index, n_bins, params, metrics, complexity, objective))
        except Exception as exc:
            results.append(
                TrialResult(
                    index,
                    n_bins,
                    {"num_clauses": num_clauses, "T": T, "s": s, "epochs": epochs},
                    None,
                    0,
                    float("-inf"),
                    error=str(exc),
                )
            )

    best = results[0]
    for trial in results[1:]:
        if trial.objective > best.objective:
            best = trial
    return SearchResult(best=best, trials=results)

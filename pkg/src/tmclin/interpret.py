"""Clause-level interpretation: readable rules, per-patient activation
matrices, and firing-frequency importance rankings."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DataError
from .schema import FeatureSchema
from .tm import (
    POSITIVE,
    TMModel,
    check_schema_match,
    clause_outputs_dataset,
    predict_dataset,
)


@dataclass(frozen=True)
class ReadableClause:
    """One clause rendered through schema provenance.

    ``predicates`` mirror the clause's INCLUDE set one-to-one (negated
    literals use the schema's negated rendering); ``literals`` holds the
    corresponding literal indices. An empty clause renders as the
    always-true symbol and never fires at inference.
    """

    clause_id: int
    polarity: int
    predicates: tuple[str, ...]
    literals: tuple[int, ...]
    fire_count: int | None = None

    @property
    def outcome_text(self) -> str:
        return "Recurrence" if self.polarity == POSITIVE else "No Recurrence"

    def text(self) -> str:
        if not self.predicates:
            body = "⊤ (empty clause, never fires at inference)"
        else:
            body = " AND ".join(self.predicates)
        return f"IF {body} THEN {self.outcome_text}"

    def to_json_dict(self) -> dict:
        return {
            "clause_id": self.clause_id,
            "polarity": "positive" if self.polarity == POSITIVE else "negative",
            "predicates": list(self.predicates),
            "literals": list(self.literals),
            "fire_count": self.fire_count,
            "text": self.text(),
        }


def extract_rules(
    model: TMModel, schema: FeatureSchema, X: np.ndarray | None = None
) -> list[ReadableClause]:
    """Render every clause in the bank; ``X`` optionally supplies a
    reference dataset for inference-mode fire counts."""
    check_schema_match(model, schema)
    if model.n_literals != schema.n_literals:
        raise DataError(
            f"model expects {model.n_literals} literals, schema provides {schema.n_literals}"
        )
    fire_counts = None
    if X is not None:
        fire_counts = clause_outputs_dataset(model, X, "infer").sum(axis=0)
    rules = []
    for c in range(model.params.num_clauses):
        clause = model.clause(c)
        literals = tuple(int(i) for i in clause.included_literals)
        predicates = tuple(schema.literal_text(i) for i in literals)
        rules.append(
            ReadableClause(
                clause_id=c,
                polarity=clause.polarity,
                predicates=predicates,
                literals=literals,
                fire_count=None if fire_counts is None else int(fire_counts[c]),
            )
        )
    return rules


@dataclass
class ClauseActivationMatrix:
    """Patients x clauses firing record at inference mode, with true and
    predicted labels per patient row."""

    fired: np.ndarray
    true_labels: np.ndarray
    predicted_labels: np.ndarray

    def __post_init__(self) -> None:
        n = self.fired.shape[0]
        if self.true_labels.shape[0] != n or self.predicted_labels.shape[0] != n:
            raise DataError("labels must be present for every matrix row")

    @property
    def n_patients(self) -> int:
        return self.fired.shape[0]

    @property
    def n_clauses(self) -> int:
        return self.fired.shape[1]


def activation_matrix(model: TMModel, X: np.ndarray, y: np.ndarray) -> ClauseActivationMatrix:
    """Inference-mode firing of every clause on every patient."""
    if X.shape[0] != y.shape[0]:
        raise DataError("X and y lengths differ")
    return ClauseActivationMatrix(
        fired=clause_outputs_dataset(model, X, "infer"),
        true_labels=np.asarray(y, dtype=np.int64),
        predicted_labels=predict_dataset(model, X),
    )


@dataclass(frozen=True)
class ClauseImportance:
    """Firing rate split by true outcome; importance is the difference
    (recurrent minus non-recurrent), in [-1, 1]."""

    clause_id: int
    rate_recurrent: float
    rate_non_recurrent: float

    @property
    def importance(self) -> float:
        return self.rate_recurrent - self.rate_non_recurrent

    def to_json_dict(self) -> dict:
        return {
            "clause_id": self.clause_id,
            "rate_recurrent": self.rate_recurrent,
            "rate_non_recurrent": self.rate_non_recurrent,
            "importance": self.importance,
        }


def clause_importance(matrix: ClauseActivationMatrix) -> list[ClauseImportance]:
    """Rank clauses by descending |importance|, ties broken by clause id.

    Requires at least one patient of each true class, otherwise one of the
    firing rates is undefined.
    """
    recurrent = matrix.true_labels == 1
    if not recurrent.any() or recurrent.all():
        raise DataError("clause importance requires both outcome classes in the matrix")
    rate_pos = matrix.fired[recurrent].mean(axis=0)
    rate_neg = matrix.fired[~recurrent].mean(axis=0)
    entries = [
        ClauseImportance(c, float(rate_pos[c]), float(rate_neg[c]))
        for c in range(matrix.n_clauses)
    ]
    return sorted(entries, key=lambda e: (-abs(e.importance), e.clause_id))


def export_heatmap_data(
    matrix: ClauseActivationMatrix,
    rules: Sequence[ReadableClause],
    top_k: int,
    csv_path: str | Path,
    legend_path: str | Path,
    header_comments: Sequence[str] = (),
) -> list[ClauseImportance]:
    """Write the per-patient firing CSV for the top_k clauses by
    |importance| plus a JSON legend of their readable forms.

    CSV columns, in order: true_label, predicted_label, then one column per
    selected clause (descending |importance|), named C<id>. Asking for more
    clauses than exist exports all of them.
    """
    from .serialize import canonical_dumps

    if top_k < 1:
        raise DataError(f"top_k must be >= 1, got {top_k}")
    if matrix.n_patients == 0:
        raise DataError("cannot export an empty activation matrix")
    if len(rules) != matrix.n_clauses:
        raise DataError("rules list does not match the matrix clause count")
    ranking = clause_importance(matrix)[: min(top_k, matrix.n_clauses)]
    selected = [e.clause_id for e in ranking]

    columns = ["true_label", "predicted_label"] + [f"C{c}" for c in selected]
    lines = list(header_comments)
    lines.append("# columns: " + ",".join(columns))
    lines.append(",".join(columns))
    for row in range(matrix.n_patients):
        cells = [str(int(matrix.true_labels[row])), str(int(matrix.predicted_labels[row]))]
        cells += [str(int(matrix.fired[row, c])) for c in selected]
        lines.append(",".join(cells))
    Path(csv_path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    legend = []
    for entry in ranking:
        item = rules[entry.clause_id].to_json_dict()
        item.update(entry.to_json_dict())
        legend.append(item)
    Path(legend_path).write_text(canonical_dumps(legend), encoding="utf-8")
    return ranking

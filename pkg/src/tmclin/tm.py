"""Tsetlin Machine core: automata states, clause evaluation, feedback,
class-weighted training, and inference.

Every literal of every clause is governed by a two-action automaton with
states 1..2N: states above N mean the literal is INCLUDED in the clause's
conjunction. The model keeps all automata in one (num_clauses, 2B) int16
matrix so clause evaluation and feedback stay vectorized; the per-clause
operations below define the semantics the vectorized path must match.

Feedback draw order within one training sample is fixed: first one uniform
per clause (the update decisions), then, for each selected matching-polarity
clause in ascending clause order, one uniform per literal. This makes the
vectorized epoch exactly equivalent to sequential per-clause application
sharing a single generator.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

from .errors import DataError, NotTrainedError, TmclinError
from .schema import FeatureSchema
from .serialize import canonical_dumps, read_json

EvalMode = Literal["train", "infer"]

POSITIVE = 1   # clause polarity voting for recurrence
NEGATIVE = -1  # clause polarity voting against

STATE_DTYPE = np.int16


@dataclass(frozen=True)
class TMParams:
    """Training hyperparameters.

    ``num_clauses`` is split evenly: the first half votes for the positive
    class, the second half against. ``class_weights`` is (weight for label
    0, weight for label 1); None means balanced weights n/(2*n_c) computed
    on the training data at fit time.
    """

    num_clauses: int = 80
    T: int = 38
    s: float = 4.0
    epochs: int = 100
    n_states: int = 100
    class_weights: tuple[float, float] | None = None
    seed: int = 7

    def __post_init__(self) -> None:
        if self.num_clauses <= 0 or self.num_clauses % 2 != 0:
            raise TmclinError(f"num_clauses must be even and positive, got {self.num_clauses}")
        if self.T < 1:
            raise TmclinError(f"T must be >= 1, got {self.T}")
        if not self.s > 1:
            raise TmclinError(f"s must be > 1, got {self.s}")
        if self.epochs < 0:
            raise TmclinError(f"epochs must be >= 0, got {self.epochs}")
        if self.n_states < 1:
            raise TmclinError(f"n_states must be >= 1, got {self.n_states}")
        if self.class_weights is not None:
            w0, w1 = self.class_weights
            if w0 < 0 or w1 < 0:
                raise TmclinError("class weights must be >= 0")
            object.__setattr__(self, "class_weights", (float(w0), float(w1)))

    def to_json_dict(self) -> dict:
        return {
            "num_clauses": self.num_clauses,
            "T": self.T,
            "s": self.s,
            "epochs": self.epochs,
            "n_states": self.n_states,
            "class_weights": list(self.class_weights) if self.class_weights else None,
            "seed": self.seed,
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "TMParams":
        weights = doc.get("class_weights")
        return cls(
            num_clauses=int(doc["num_clauses"]),
            T=int(doc["T"]),
            s=float(doc["s"]),
            epochs=int(doc["epochs"]),
            n_states=int(doc["n_states"]),
            class_weights=tuple(weights) if weights else None,
            seed=int(doc["seed"]),
        )


@dataclass
class Clause:
    """One conjunction: a polarity and one automaton state per literal.

    ``states`` may be a view into a model's clause bank, in which case
    mutating feedback applied here is visible to the model.
    """

    polarity: int
    states: np.ndarray
    n_states: int = 100

    @property
    def include_mask(self) -> np.ndarray:
        return self.states > self.n_states

    @property
    def included_literals(self) -> np.ndarray:
        return np.flatnonzero(self.states > self.n_states)


@dataclass
class LearningCurve:
    """Per-epoch accuracy records: (epoch, train accuracy, holdout or None)."""

    records: list[tuple[int, float, float | None]] = field(default_factory=list)

    def train_accuracy(self) -> list[float]:
        return [r[1] for r in self.records]

    def holdout_accuracy(self) -> list[float | None]:
        return [r[2] for r in self.records]

    def write_csv(self, path: str | Path, header_comments: Sequence[str] = ()) -> None:
        lines = list(header_comments)
        lines.append("epoch,train_accuracy,holdout_accuracy")
        for epoch, train_acc, holdout in self.records:
            hold = "" if holdout is None else repr(holdout)
            lines.append(f"{epoch},{repr(train_acc)},{hold}")
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


@dataclass
class TMModel:
    """Clause bank plus hyperparameters, tied to a schema fingerprint.

    ``states`` has shape (num_clauses, 2B); ``polarities`` holds +1 for the
    first half of the clauses and -1 for the second half.
    """

    params: TMParams
    n_literals: int
    schema_fingerprint: str
    states: np.ndarray
    polarities: np.ndarray
    trained: bool = False
    provenance: dict | None = None

    @classmethod
    def initialize(cls, schema: FeatureSchema, params: TMParams) -> "TMModel":
        """Fresh model: every automaton at state N (all literals excluded)."""
        n_literals = schema.n_literals
        half = params.num_clauses // 2
        states = np.full((params.num_clauses, n_literals), params.n_states, dtype=STATE_DTYPE)
        polarities = np.concatenate(
            [np.full(half, POSITIVE, dtype=np.int8), np.full(half, NEGATIVE, dtype=np.int8)]
        )
        return cls(
            params=params,
            n_literals=n_literals,
            schema_fingerprint=schema.fingerprint(),
            states=states,
            polarities=polarities,
        )

    def clause(self, index: int) -> Clause:
        """View of one clause; its states alias the bank."""
        return Clause(int(self.polarities[index]), self.states[index], self.params.n_states)

    def clauses(self) -> list[Clause]:
        return [self.clause(i) for i in range(self.params.num_clauses)]

    def included_literal_count(self) -> int:
        """Total INCLUDE-action automata across the bank (model complexity)."""
        return int((self.states > self.params.n_states).sum())

    def validate_input(self, x: np.ndarray) -> None:
        if x.shape != (self.n_literals,):
            raise DataError(
                f"literal vector has shape {x.shape}, expected ({self.n_literals},)"
            )


# ---------------------------------------------------------------------------
# Evaluation


def clause_eval(clause: Clause, x: np.ndarray, mode: EvalMode) -> bool:
    """True iff every included literal is true in x.

    A clause with no included literals is vacuously true while training but
    defined false at inference, so unformed clauses cannot vote.
    """
    if x.shape != clause.states.shape:
        raise DataError(
            f"literal vector length {x.shape} does not match clause length {clause.states.shape}"
        )
    include = clause.include_mask
    if not include.any():
        return mode == "train"
    return not np.any(include & ~x)


def _clause_outputs(model: TMModel, x: np.ndarray, mode: EvalMode) -> np.ndarray:
    include = model.states > model.params.n_states
    violated = np.any(include & ~x[None, :], axis=1)
    fired = ~violated
    if mode == "infer":
        fired &= include.any(axis=1)
    return fired


def clause_outputs_dataset(model: TMModel, X: np.ndarray, mode: EvalMode = "infer") -> np.ndarray:
    """Firing matrix of shape (n_samples, num_clauses)."""
    include = model.states > model.params.n_states
    violations = (~X).astype(np.int32) @ include.T.astype(np.int32)
    fired = violations == 0
    if mode == "infer":
        fired &= include.any(axis=1)[None, :]
    return fired


def class_sum(model: TMModel, x: np.ndarray, mode: EvalMode) -> int:
    """Positive minus negative firing counts, clamped to [-T, T]."""
    model.validate_input(x)
    fired = _clause_outputs(model, x, mode)
    raw = int(model.polarities[fired].sum())
    T = model.params.T
    return max(-T, min(T, raw))


def class_sums_dataset(model: TMModel, X: np.ndarray, mode: EvalMode = "infer") -> np.ndarray:
    fired = clause_outputs_dataset(model, X, mode)
    raw = fired @ model.polarities.astype(np.int32)
    return np.clip(raw, -model.params.T, model.params.T)


def predict(model: TMModel, x: np.ndarray) -> int:
    """1 (recurrence) iff the clamped inference-mode sum is >= 0."""
    if not model.trained:
        raise NotTrainedError("predict requires a trained model")
    return 1 if class_sum(model, x, "infer") >= 0 else 0


def predict_dataset(model: TMModel, X: np.ndarray) -> np.ndarray:
    if not model.trained:
        raise NotTrainedError("predict requires a trained model")
    return (class_sums_dataset(model, X, "infer") >= 0).astype(np.int64)


# ---------------------------------------------------------------------------
# Feedback


def type_i_feedback(clause: Clause, x: np.ndarray, s: float, rng: np.random.Generator) -> None:
    """Pattern-capturing feedback for clauses whose polarity matches the
    sample's target vote.

    Fired clause: literals true in x step toward INCLUDE with probability
    (s-1)/s; literals false in x (necessarily excluded) step deeper into
    EXCLUDE with probability 1/s. Non-fired clause: every literal steps
    toward EXCLUDE with probability 1/s. Steps saturate at [1, 2N].
    """
    draws = rng.random(clause.states.shape[0])
    _apply_type_i(clause.states, x, clause_eval(clause, x, "train"), s, draws, clause.n_states)


def _apply_type_i(
    states: np.ndarray, x: np.ndarray, fired: bool, s: float, draws: np.ndarray, n_states: int
) -> None:
    if fired:
        up = x & (draws < (s - 1.0) / s)
        down = ~x & (draws < 1.0 / s) & (states <= n_states)
    else:
        up = np.zeros_like(x)
        down = draws < 1.0 / s
    delta = up.astype(STATE_DTYPE) - down.astype(STATE_DTYPE)
    np.clip(states + delta, 1, 2 * n_states, out=states)


def type_ii_feedback(clause: Clause, x: np.ndarray) -> None:
    """False-positive suppression for fired clauses of opposing polarity:
    every excluded literal that is false in x steps once toward inclusion,
    which would falsify the clause on this sample. Included literals are
    never touched."""
    _apply_type_ii(clause.states, x, clause.n_states)


def _apply_type_ii(states: np.ndarray, x: np.ndarray, n_states: int) -> None:
    states += (~x & (states <= n_states)).astype(STATE_DTYPE)


def resolve_class_weights(params: TMParams, y: np.ndarray) -> tuple[float, float]:
    """Explicit weights if given, else balanced n/(2*n_c) from the labels."""
    if params.class_weights is not None:
        return params.class_weights
    n = y.shape[0]
    n_pos = int(y.sum())
    n_neg = n - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DataError("balanced class weights require both classes present")
    return (n / (2.0 * n_neg), n / (2.0 * n_pos))


def fit_epoch(
    model: TMModel,
    X: np.ndarray,
    y: np.ndarray,
    rng: np.random.Generator,
    class_weights: tuple[float, float] = (1.0, 1.0),
) -> None:
    """One pass over a seeded shuffle of the data, mutating the clause bank.

    Per sample with clamped vote v: matching-polarity clauses receive Type I
    and opposing fired clauses Type II, each with probability
    w_c * (T - v)/(2T) for positive targets and w_c * (T + v)/(2T) for
    negative ones, capped at 1.
    """
    if X.shape[0] == 0:
        raise DataError("fit_epoch requires non-empty data")
    if X.shape[1] != model.n_literals:
        raise DataError(f"data has {X.shape[1]} literals, model expects {model.n_literals}")
    n_states = model.params.n_states
    T = model.params.T
    s = model.params.s
    num_clauses = model.params.num_clauses
    n_literals = model.n_literals
    positive = model.polarities == POSITIVE

    for i in rng.permutation(X.shape[0]):
        x = X[i]
        target = int(y[i])
        include = model.states > n_states
        fired = ~np.any(include & ~x[None, :], axis=1)
        v = int(model.polarities[fired].sum())
        v = max(-T, min(T, v))
        weight = class_weights[target]
        p = weight * ((T - v) if target == 1 else (T + v)) / (2.0 * T)
        p = min(1.0, p)
        update = rng.random(num_clauses) < p
        matching = positive if target == 1 else ~positive

        type_i_rows = np.flatnonzero(update & matching)
        if type_i_rows.size:
            draws = rng.random((type_i_rows.size, n_literals))
            fired_rows = fired[type_i_rows]
            rows = model.states[type_i_rows]
            up = fired_rows[:, None] & x[None, :] & (draws < (s - 1.0) / s)
            down_fired = (
                fired_rows[:, None] & ~x[None, :] & (draws < 1.0 / s) & (rows <= n_states)
            )
            down_idle = ~fired_rows[:, None] & (draws < 1.0 / s)
            delta = up.astype(STATE_DTYPE) - (down_fired | down_idle).astype(STATE_DTYPE)
            model.states[type_i_rows] = np.clip(rows + delta, 1, 2 * n_states)

        type_ii_rows = np.flatnonzero(update & ~matching & fired)
        if type_ii_rows.size:
            rows = model.states[type_ii_rows]
            rows += (~x[None, :] & (rows <= n_states)).astype(STATE_DTYPE)
            model.states[type_ii_rows] = rows


def fit(
    model: TMModel,
    X: np.ndarray,
    y: np.ndarray,
    X_holdout: np.ndarray | None = None,
    y_holdout: np.ndarray | None = None,
) -> LearningCurve:
    """Train for ``params.epochs`` epochs from a fresh generator seeded with
    ``params.seed``, recording post-epoch accuracies. Deterministic for a
    fixed seed and data order; marks the model trained even with 0 epochs."""
    if X.shape[0] == 0:
        raise DataError("fit requires non-empty training data")
    if y.shape[0] != X.shape[0]:
        raise DataError("X and y lengths differ")
    class_weights = resolve_class_weights(model.params, y)
    rng = np.random.default_rng(model.params.seed)
    curve = LearningCurve()
    model.trained = True
    for epoch in range(1, model.params.epochs + 1):
        fit_epoch(model, X, y, rng, class_weights)
        train_acc = float((predict_dataset(model, X) == y).sum() / y.shape[0])
        holdout_acc = None
        if X_holdout is not None and X_holdout.shape[0] > 0:
            holdout_acc = float(
                (predict_dataset(model, X_holdout) == y_holdout).sum() / y_holdout.shape[0]
            )
        curve.records.append((epoch, train_acc, holdout_acc))
    return curve


# ---------------------------------------------------------------------------
# Persistence


MODEL_FORMAT = "tmclin-model"


def model_to_json_dict(model: TMModel) -> dict:
    doc = {
        "format": MODEL_FORMAT,
        "params": model.params.to_json_dict(),
        "n_literals": model.n_literals,
        "schema_fingerprint": model.schema_fingerprint,
        "polarities": model.polarities.astype(int).tolist(),
        "states": model.states.astype(int).tolist(),
        "trained": bool(model.trained),
    }
    if model.provenance is not None:
        doc["provenance"] = model.provenance
    return doc


def model_from_json_dict(doc: dict) -> TMModel:
    if doc.get("format") != MODEL_FORMAT:
        raise DataError(f"not a {MODEL_FORMAT} document")
    params = TMParams.from_json_dict(doc["params"])
    states = np.array(doc["states"], dtype=STATE_DTYPE)
    polarities = np.array(doc["polarities"], dtype=np.int8)
    n_literals = int(doc["n_literals"])
    if states.shape != (params.num_clauses, n_literals):
        raise DataError("clause bank shape does not match params")
    if np.any(states < 1) or np.any(states > 2 * params.n_states):
        raise DataError("automaton states outside [1, 2N]")
    return TMModel(
        params=params,
        n_literals=n_literals,
        schema_fingerprint=str(doc["schema_fingerprint"]),
        states=states,
        polarities=polarities,
        trained=bool(doc["trained"]),
        provenance=doc.get("provenance"),
    )


def save_model(model: TMModel, path: str | Path) -> None:
    """Canonical JSON write; serialize -> load -> serialize is byte-identical."""
    Path(path).write_text(canonical_dumps(model_to_json_dict(model)), encoding="utf-8")


def load_model(path: str | Path) -> TMModel:
    return model_from_json_dict(read_json(path))


def check_schema_match(model: TMModel, schema: FeatureSchema) -> None:
    from .errors import FingerprintMismatchError

    if model.schema_fingerprint != schema.fingerprint():
        raise FingerprintMismatchError(
            "model schema fingerprint does not match the supplied schema "
            f"({model.schema_fingerprint[:12]}... vs {schema.fingerprint()[:12]}...)"
        )

"""Synthetic cohort generation from planted ground-truth rules.

The real trial data is private, so verification runs against cohorts whose
labels are produced by known conjunctive rules over the schema's own
predicates. Labels are a pure function of the record (highest-weight
matching rule, else the background label), which keeps the noise-free
cohort perfectly classifiable by construction; the target class balance is
met by stratified resampling during generation, and label noise is applied
as independent flips afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from .errors import CohortError, SchemaError
from .schema import FeatureSchema, PatientRecord, binarize_record

CONTINUOUS_OPS = (">", "<=")
DISCRETE_OPS = ("=", "!=")


@dataclass(frozen=True)
class RulePredicate:
    """One condition on a schema feature.

    Continuous features take ``>`` or ``<=`` against a declared cutoff;
    categorical and binary features take ``=`` or ``!=``.
    """

    feature: str
    op: str
    value: object

    def to_json_dict(self) -> dict:
        return {"feature": self.feature, "op": self.op, "value": self.value}

    @classmethod
    def from_json_dict(cls, doc: Mapping) -> "RulePredicate":
        return cls(str(doc["feature"]), str(doc["op"]), doc["value"])


@dataclass(frozen=True)
class PlantedRule:
    """A conjunction of predicates forcing a label, with a weight used to
    resolve conflicts between matching rules (ties go to the positive
    label)."""

    name: str
    predicates: tuple[RulePredicate, ...]
    label: int
    weight: float = 1.0

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "predicates": [p.to_json_dict() for p in self.predicates],
            "label": self.label,
            "weight": self.weight,
        }

    @classmethod
    def from_json_dict(cls, doc: Mapping) -> "PlantedRule":
        return cls(
            name=str(doc["name"]),
            predicates=tuple(RulePredicate.from_json_dict(p) for p in doc["predicates"]),
            label=int(doc["label"]),
            weight=float(doc.get("weight", 1.0)),
        )


def compile_rule(rule: PlantedRule, schema: FeatureSchema) -> tuple[tuple[int, bool], ...]:
    """Translate a rule into (raw bit index, required value) pairs, raising
    if any predicate is not expressible in the schema's bits."""
    requirements = []
    for pred in rule.predicates:
        spec = schema.spec(pred.feature)
        if spec.kind == "continuous":
            if pred.op not in CONTINUOUS_OPS:
                raise SchemaError(
                    f"rule {rule.name!r}: op {pred.op!r} invalid for continuous {pred.feature!r}"
                )
            bit = schema.raw_bit_index(pred.feature, cutoff=float(pred.value))  # type: ignore[arg-type]
            requirements.append((bit, pred.op == ">"))
        elif spec.kind == "categorical":
            if pred.op not in DISCRETE_OPS:
                raise SchemaError(
                    f"rule {rule.name!r}: op {pred.op!r} invalid for categorical {pred.feature!r}"
                )
            bit = schema.raw_bit_index(pred.feature, category=str(pred.value))
            requirements.append((bit, pred.op == "="))
        else:
            if pred.op not in DISCRETE_OPS:
                raise SchemaError(
                    f"rule {rule.name!r}: op {pred.op!r} invalid for binary {pred.feature!r}"
                )
            required = bool(pred.value) if pred.op == "=" else not bool(pred.value)
            requirements.append((schema.raw_bit_index(pred.feature), required))
    return tuple(requirements)


def _matches(raw_bits: np.ndarray, compiled: Sequence[tuple[int, bool]]) -> bool:
    return all(bool(raw_bits[bit]) == required for bit, required in compiled)


def oracle_label(
    record: PatientRecord,
    rules: Sequence[PlantedRule],
    schema: FeatureSchema,
    background_label: int = 0,
) -> int:
    """Noise-free ground-truth label: highest-weight matching rule wins,
    weight ties resolve to the positive label, no match falls back to the
    background label."""
    raw = binarize_record(record, schema)[: schema.raw_bit_count]
    matching = [rule for rule in rules if _matches(raw, compile_rule(rule, schema))]
    if not matching:
        return background_label
    best = max(matching, key=lambda r: (r.weight, r.label))
    return best.label


# ---------------------------------------------------------------------------
# Feature samplers

SAMPLER_KINDS = ("uniform_int", "uniform", "categorical", "bernoulli", "piecewise")


def sample_value(sampler: Mapping, rng: np.random.Generator) -> object:
    """Draw one raw feature value from a JSON-friendly sampler spec."""
    kind = sampler.get("kind")
    if kind == "uniform_int":
        return int(rng.integers(int(sampler["low"]), int(sampler["high"]) + 1))
    if kind == "uniform":
        return float(rng.uniform(float(sampler["low"]), float(sampler["high"])))
    if kind == "categorical":
        categories = list(sampler["categories"])
        probs = sampler.get("probs")
        idx = int(rng.choice(len(categories), p=probs))
        return categories[idx]
    if kind == "bernoulli":
        return bool(rng.random() < float(sampler["p"]))
    if kind == "piecewise":
        # Uniform within a breakpoint segment chosen with the given probs;
        # lets bit marginals be pinned exactly.
        breaks = [float(b) for b in sampler["breakpoints"]]
        probs = [float(p) for p in sampler["probs"]]
        seg = int(rng.choice(len(probs), p=probs))
        return float(rng.uniform(breaks[seg], breaks[seg + 1]))
    raise CohortError(f"unknown sampler kind {kind!r}")


@dataclass(frozen=True)
class CohortConfig:
    """Generation recipe: size, class balance, noise, rules, and per-feature
    samplers. Sampler keys not present in the schema become extra CSV
    columns (e.g. clinical factors for baseline scorers)."""

    n: int = 330
    positive_fraction: float = 0.40
    noise_rate: float = 0.05
    seed: int = 7
    rules: tuple[PlantedRule, ...] = ()
    samplers: Mapping[str, Mapping] = field(default_factory=dict)
    background_label: int = 0
    max_resample: int = 10_000

    def __post_init__(self) -> None:
        if self.n < 2:
            raise CohortError(f"cohort size must be >= 2, got {self.n}")
        if not 0.0 <= self.positive_fraction <= 1.0:
            raise CohortError("positive fraction must lie in [0, 1]")
        if not 0.0 <= self.noise_rate < 1.0:
            raise CohortError("noise rate must lie in [0, 1)")
        if self.background_label not in (0, 1):
            raise CohortError("background label must be 0 or 1")

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "positive_fraction": self.positive_fraction,
            "noise_rate": self.noise_rate,
            "seed": self.seed,
            "rules": [r.to_json_dict() for r in self.rules],
            "samplers": {k: dict(v) for k, v in sorted(self.samplers.items())},
            "background_label": self.background_label,
            "max_resample": self.max_resample,
        }

    @classmethod
    def from_json_dict(cls, doc: Mapping) -> "CohortConfig":
        return cls(
            n=int(doc["n"]),
            positive_fraction=float(doc["positive_fraction"]),
            noise_rate=float(doc["noise_rate"]),
            seed=int(doc["seed"]),
            rules=tuple(PlantedRule.from_json_dict(r) for r in doc.get("rules", [])),
            samplers=dict(doc.get("samplers", {})),
            background_label=int(doc.get("background_label", 0)),
            max_resample=int(doc.get("max_resample", 10_000)),
        )


def generate_cohort(config: CohortConfig, schema: FeatureSchema) -> list[PatientRecord]:
    """Generate a labeled cohort.

    Records are sampled feature by feature and labeled by the planted rules;
    a record whose class quota is already full is resampled, so the
    pre-noise class balance hits round(n * positive_fraction) exactly.
    Raises CohortError (reporting the achieved fraction) if the samplers
    cannot produce the class the quota still needs.
    """
    for spec in schema.specs:
        if spec.name not in config.samplers:
            raise CohortError(f"no sampler declared for feature {spec.name!r}")
    for rule in config.rules:
        compile_rule(rule, schema)  # validate expressibility up front

    rng = np.random.default_rng(config.seed)
    extra_names = sorted(set(config.samplers) - {s.name for s in schema.specs})
    n_pos = round(config.n * config.positive_fraction)
    quota = {1: n_pos, 0: config.n - n_pos}
    counts = {0: 0, 1: 0}
    records: list[PatientRecord] = []

    for _ in range(config.n):
        for _attempt in range(config.max_resample):
            values: dict[str, object] = {}
            for spec in schema.specs:
                values[spec.name] = sample_value(config.samplers[spec.name], rng)
            for name in extra_names:
                values[name] = sample_value(config.samplers[name], rng)
            record = PatientRecord(values)
            label = oracle_label(record, config.rules, schema, config.background_label)
            if counts[label] < quota[label]:
                break
        else:
            achieved = counts[1] / max(1, len(records))
            raise CohortError(
                "could not satisfy target positive fraction "
                f"{config.positive_fraction:g}; achieved {achieved:.3f} after "
                f"{config.max_resample} resampling attempts"
            )
        counts[label] += 1
        records.append(replace(record, label=label))

    if config.noise_rate > 0.0:
        flips = rng.random(config.n) < config.noise_rate
        records = [
            replace(r, label=(r.label ^ 1) if flip else r.label)
            for r, flip in zip(records, flips)
        ]
    return records

"""Feature schema and binarization.

Raw patient records become boolean literal vectors: continuous features via
thermometer encoding against declared cut-offs, categorical features via
one-hot encoding, binary features as a single bit. The B raw bits are then
mirrored by B negated bits, so every model input has length 2B and satisfies
bits[B + i] == NOT bits[i].
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DataError, SchemaError
from .serialize import compact_dumps, read_json, sha256_hex, write_json

KINDS = ("continuous", "categorical", "binary")

LABEL_COLUMN = "label"


@dataclass(frozen=True)
class FeatureSpec:
    """Declaration of one raw feature and how it binarizes.

    ``cutoffs`` apply to continuous features only and are expressed in the
    raw feature's units (e.g. days). ``ladders`` optionally declares
    alternative cut-off ladders keyed by their length, used by n_bins tuning;
    a feature without a ladder for the requested size keeps its default
    cutoffs. ``unit`` is only used when rendering predicates.
    """

    name: str
    kind: str
    cutoffs: tuple[float, ...] = ()
    categories: tuple[str, ...] = ()
    unit: str | None = None
    ladders: Mapping[int, tuple[float, ...]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.name:
            raise SchemaError("feature name must be non-empty")
        if self.kind not in KINDS:
            raise SchemaError(f"feature {self.name!r}: unknown kind {self.kind!r}")
        object.__setattr__(self, "cutoffs", tuple(float(c) for c in self.cutoffs))
        object.__setattr__(self, "categories", tuple(self.categories))
        object.__setattr__(
            self,
            "ladders",
            {int(k): tuple(float(c) for c in v) for k, v in self.ladders.items()},
        )
        if self.kind == "continuous":
            if not self.cutoffs:
                raise SchemaError(f"feature {self.name!r}: continuous requires cutoffs")
            _check_cutoffs(self.name, self.cutoffs)
            if self.categories:
                raise SchemaError(f"feature {self.name!r}: cutoffs and categories are exclusive")
            for size, ladder in self.ladders.items():
                if len(ladder) != size:
                    raise SchemaError(
                        f"feature {self.name!r}: ladder keyed {size} has {len(ladder)} cutoffs"
                    )
                _check_cutoffs(self.name, ladder)
        else:
            if self.cutoffs or self.ladders:
                raise SchemaError(f"feature {self.name!r}: cutoffs only apply to continuous kind")
            if self.kind == "categorical":
                if not self.categories:
                    raise SchemaError(f"feature {self.name!r}: categorical requires categories")
                if len(set(self.categories)) != len(self.categories):
                    raise SchemaError(f"feature {self.name!r}: duplicate categories")
            elif self.categories:
                raise SchemaError(f"feature {self.name!r}: binary takes no categories")

    @property
    def width(self) -> int:
        """Number of raw bits this feature contributes."""
        if self.kind == "continuous":
            return len(self.cutoffs)
        if self.kind == "categorical":
            return len(self.categories)
        return 1


def _check_cutoffs(name: str, cutoffs: Sequence[float]) -> None:
    if any(not math.isfinite(c) for c in cutoffs):
        raise SchemaError(f"feature {name!r}: cutoffs must be finite")
    if any(b <= a for a, b in zip(cutoffs, cutoffs[1:])):
        raise SchemaError(f"feature {name!r}: cutoffs must be strictly ascending")


@dataclass(frozen=True)
class PatientRecord:
    """One raw patient row: feature values plus an optional 0/1 outcome.

    ``values`` may carry extra columns beyond the schema (e.g. clinical
    factors consumed by baseline scorers); the binarizer ignores them.
    """

    values: Mapping[str, object]
    label: int | None = None


class FeatureSchema:
    """Ordered feature specs with bit provenance.

    Raw bits are laid out feature by feature in declaration order; bit
    ``B + i`` is the negation of bit ``i``. ``provenance`` maps every raw
    bit index to its human-readable predicate text.
    """

    def __init__(self, specs: Iterable[FeatureSpec]):
        self.specs: tuple[FeatureSpec, ...] = tuple(specs)
        if not self.specs:
            raise SchemaError("schema requires at least one feature")
        names = [s.name for s in self.specs]
        if len(set(names)) != len(names):
            raise SchemaError("duplicate feature names in schema")
        self._offsets: dict[str, int] = {}
        offset = 0
        for spec in self.specs:
            self._offsets[spec.name] = offset
            offset += spec.width
        self.raw_bit_count: int = offset
        self.provenance: dict[int, str] = {
            i: self._predicate_text(i, negated=False) for i in range(self.raw_bit_count)
        }
        self._parse_map: dict[str, int] = {}
        for i in range(self.raw_bit_count):
            self._parse_map[self.provenance[i]] = i
            self._parse_map[self._predicate_text(i, negated=True)] = self.raw_bit_count + i

    @property
    def n_literals(self) -> int:
        return 2 * self.raw_bit_count

    def spec(self, name: str) -> FeatureSpec:
        for s in self.specs:
            if s.name == name:
                return s
        raise SchemaError(f"unknown feature {name!r}")

    def _locate(self, raw_bit: int) -> tuple[FeatureSpec, int]:
        """Return (spec, position within the feature) for a raw bit index."""
        if not 0 <= raw_bit < self.raw_bit_count:
            raise SchemaError(f"raw bit index {raw_bit} outside [0, {self.raw_bit_count})")
        for spec in self.specs:
            start = self._offsets[spec.name]
            if start <= raw_bit < start + spec.width:
                return spec, raw_bit - start
        raise SchemaError(f"no provenance for raw bit {raw_bit}")  # unreachable

    def _predicate_text(self, raw_bit: int, negated: bool) -> str:
        spec, pos = self._locate(raw_bit)
        if spec.kind == "continuous":
            suffix = f" {spec.unit}" if spec.unit else ""
            op = "≤" if negated else ">"
            return f"{spec.name} {op} {spec.cutoffs[pos]:g}{suffix}"
        if spec.kind == "categorical":
            op = "≠" if negated else "="
            return f"{spec.name} {op} {spec.categories[pos]}"
        return f"NOT {spec.name}" if negated else spec.name

    def literal_text(self, literal: int) -> str:
        """Human-readable predicate for any literal index in [0, 2B)."""
        if not 0 <= literal < self.n_literals:
            raise SchemaError(f"literal index {literal} outside [0, {self.n_literals})")
        if literal < self.raw_bit_count:
            return self.provenance[literal]
        return self._predicate_text(literal - self.raw_bit_count, negated=True)

    def parse_predicate(self, text: str) -> int:
        """Inverse of literal_text: recover the literal index from its text."""
        try:
            return self._parse_map[text]
        except KeyError:
            raise SchemaError(f"predicate {text!r} does not match any literal") from None

    def raw_bit_index(self, feature: str, *, cutoff: float | None = None,
                      category: str | None = None) -> int:
        """Raw bit index of a feature predicate (cutoff for continuous,
        category for categorical, neither for binary)."""
        spec = self.spec(feature)
        start = self._offsets[feature]
        if spec.kind == "continuous":
            if cutoff is None:
                raise SchemaError(f"feature {feature!r}: cutoff required")
            for pos, c in enumerate(spec.cutoffs):
                if c == float(cutoff):
                    return start + pos
            raise SchemaError(f"feature {feature!r}: {cutoff!r} is not a declared cutoff")
        if spec.kind == "categorical":
            if category is None:
                raise SchemaError(f"feature {feature!r}: category required")
            if category not in spec.categories:
                raise SchemaError(f"feature {feature!r}: unknown category {category!r}")
            return start + spec.categories.index(category)
        return start

    def with_n_bins(self, n_bins: int) -> "FeatureSchema":
        """Schema variant with each continuous feature using its declared
        ladder of the given size; features without one keep their cutoffs."""
        variants = []
        for spec in self.specs:
            if spec.kind == "continuous" and n_bins in spec.ladders:
                variants.append(
                    FeatureSpec(spec.name, spec.kind, spec.ladders[n_bins],
                                unit=spec.unit, ladders=spec.ladders)
                )
            else:
                variants.append(spec)
        return FeatureSchema(variants)

    def fingerprint(self) -> str:
        """Hash of the active encoding (ladder declarations excluded)."""
        payload = [
            [s.name, s.kind, list(s.cutoffs), list(s.categories), s.unit]
            for s in self.specs
        ]
        return sha256_hex(compact_dumps(payload))

    def to_json_dict(self) -> dict:
        features = []
        for s in self.specs:
            entry: dict = {"name": s.name, "kind": s.kind}
            if s.kind == "continuous":
                entry["cutoffs"] = list(s.cutoffs)
                if s.unit:
                    entry["unit"] = s.unit
                if s.ladders:
                    entry["ladders"] = {str(k): list(v) for k, v in sorted(s.ladders.items())}
            elif s.kind == "categorical":
                entry["categories"] = list(s.categories)
            features.append(entry)
        return {"features": features}

    @classmethod
    def from_json_dict(cls, doc: Mapping) -> "FeatureSchema":
        try:
            raw_features = doc["features"]
        except (KeyError, TypeError):
            raise SchemaError("schema document must contain a 'features' list") from None
        specs = []
        for entry in raw_features:
            specs.append(
                FeatureSpec(
                    name=entry.get("name", ""),
                    kind=entry.get("kind", ""),
                    cutoffs=tuple(entry.get("cutoffs", ())),
                    categories=tuple(entry.get("categories", ())),
                    unit=entry.get("unit"),
                    ladders={int(k): tuple(v) for k, v in entry.get("ladders", {}).items()},
                )
            )
        return cls(specs)


# ---------------------------------------------------------------------------
# Encoding operations


def thermometer_encode(value: float, cutoffs: Sequence[float]) -> np.ndarray:
    """Bit i is set iff value > cutoffs[i] (strict), so the result is a
    prefix of ones. Rejects non-finite values."""
    if not cutoffs:
        raise SchemaError("thermometer encoding requires at least one cutoff")
    value = float(value)
    if not math.isfinite(value):
        raise SchemaError(f"cannot thermometer-encode non-finite value {value!r}")
    return np.array([value > c for c in cutoffs], dtype=bool)


def one_hot_encode(value: str, categories: Sequence[str]) -> np.ndarray:
    """Exactly one bit set, at the value's index among the categories."""
    try:
        idx = list(categories).index(value)
    except ValueError:
        raise SchemaError(f"unknown category {value!r} (expected one of {list(categories)})") from None
    bits = np.zeros(len(categories), dtype=bool)
    bits[idx] = True
    return bits


def _encode_feature(spec: FeatureSpec, value: object) -> np.ndarray:
    if value is None:
        raise SchemaError(f"feature {spec.name!r}: missing value")
    if spec.kind == "continuous":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise SchemaError(f"feature {spec.name!r}: expected a number, got {value!r}")
        return thermometer_encode(float(value), spec.cutoffs)
    if spec.kind == "categorical":
        if not isinstance(value, str):
            raise SchemaError(f"feature {spec.name!r}: expected a category label, got {value!r}")
        return one_hot_encode(value, spec.categories)
    if not isinstance(value, bool):
        raise SchemaError(f"feature {spec.name!r}: expected a truth value, got {value!r}")
    return np.array([value], dtype=bool)


def binarize_record(record: PatientRecord, schema: FeatureSchema) -> np.ndarray:
    """Literal vector of length 2B: per-feature encodings concatenated,
    followed by their negations."""
    parts = []
    for spec in schema.specs:
        if spec.name not in record.values:
            raise SchemaError(f"feature {spec.name!r}: missing value")
        try:
            parts.append(_encode_feature(spec, record.values[spec.name]))
        except SchemaError:
            raise
        except Exception as exc:  # pragma: no cover - defensive
            raise SchemaError(f"feature {spec.name!r}: {exc}") from exc
    raw = np.concatenate(parts)
    return np.concatenate([raw, ~raw])


def binarize_dataset(
    records: Sequence[PatientRecord], schema: FeatureSchema
) -> tuple[np.ndarray, np.ndarray]:
    """Binarize labeled records, order-preserving.

    Returns (X, y) where X has shape (n, 2B) and y holds 0/1 labels. Any
    failure aborts with the offending record index in the message.
    """
    n = len(records)
    X = np.zeros((n, schema.n_literals), dtype=bool)
    y = np.zeros(n, dtype=np.int64)
    for i, record in enumerate(records):
        if record.label is None:
            raise DataError(f"record {i}: missing label")
        if record.label not in (0, 1):
            raise DataError(f"record {i}: label must be 0 or 1, got {record.label!r}")
        try:
            X[i] = binarize_record(record, schema)
        except SchemaError as exc:
            raise DataError(f"record {i}: {exc}") from exc
        y[i] = record.label
    return X, y


# ---------------------------------------------------------------------------
# Schema and dataset files


def save_schema(schema: FeatureSchema, path: str | Path) -> None:
    write_json(path, schema.to_json_dict())


def load_schema(path: str | Path) -> FeatureSchema:
    return FeatureSchema.from_json_dict(read_json(path))


def _parse_cell(spec: FeatureSpec, text: str, row: int) -> object:
    text = text.strip()
    if text == "":
        raise DataError(f"row {row}: feature {spec.name!r}: missing value")
    if spec.kind == "continuous":
        try:
            value = float(text)
        except ValueError:
            raise DataError(f"row {row}: feature {spec.name!r}: not a number: {text!r}") from None
        if not math.isfinite(value):
            raise DataError(f"row {row}: feature {spec.name!r}: non-finite value")
        return value
    if spec.kind == "categorical":
        return text
    lowered = text.lower()
    if lowered in ("1", "true"):
        return True
    if lowered in ("0", "false"):
        return False
    raise DataError(f"row {row}: feature {spec.name!r}: not a truth value: {text!r}")


def load_records_csv(
    path: str | Path, schema: FeatureSchema, require_label: bool = True
) -> list[PatientRecord]:
    """Read a data CSV (header row, optional leading '#' comment lines).

    The header must contain every schema feature name; extra columns are
    kept on the record untouched so downstream consumers (e.g. clinical
    scorers) can read them.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if not rows:
        raise DataError(f"{path}: empty data file")
    header, *body = rows
    missing = [s.name for s in schema.specs if s.name not in header]
    if missing:
        raise DataError(f"{path}: missing feature columns {missing}")
    if require_label and LABEL_COLUMN not in header:
        raise DataError(f"{path}: missing '{LABEL_COLUMN}' column")
    col = {name: header.index(name) for name in header}
    schema_names = {s.name for s in schema.specs}
    records = []
    for i, cells in enumerate(body):
        if len(cells) != len(header):
            raise DataError(f"row {i}: expected {len(header)} cells, got {len(cells)}")
        values: dict[str, object] = {}
        for spec in schema.specs:
            values[spec.name] = _parse_cell(spec, cells[col[spec.name]], i)
        for name in header:
            if name not in schema_names and name != LABEL_COLUMN:
                values[name] = cells[col[name]].strip()
        label = None
        if LABEL_COLUMN in col:
            text = cells[col[LABEL_COLUMN]].strip()
            if text != "":
                if text not in ("0", "1"):
                    raise DataError(f"row {i}: label must be 0 or 1, got {text!r}")
                label = int(text)
        if require_label and label is None:
            raise DataError(f"row {i}: missing label")
        records.append(PatientRecord(values, label))
    return records


def _format_cell(value: object) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_records_csv(
    path: str | Path,
    records: Sequence[PatientRecord],
    schema: FeatureSchema,
    header_comments: Sequence[str] = (),
) -> None:
    """Write records deterministically: schema features first (declaration
    order), then extra columns (sorted), then the label column."""
    schema_names = [s.name for s in schema.specs]
    extras = sorted(
        {k for r in records for k in r.values.keys() if k not in schema_names}
    )
    header = schema_names + extras + [LABEL_COLUMN]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for line in header_comments:
            fh.write(line + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for record in records:
            row = [_format_cell(record.values.get(name, "")) for name in schema_names + extras]
            row.append("" if record.label is None else str(int(record.label)))
            writer.writerow(row)

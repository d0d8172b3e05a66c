"""Shipped defaults: the PHOTO-like schema, cohort samplers, and planted
rules mirroring the published example clauses.

These are scaffolding for verification on synthetic cohorts, not clinical
claims; real deployments supply their own schema file and data.
"""

from __future__ import annotations

from .schema import FeatureSchema, FeatureSpec
from .synth import CohortConfig, PlantedRule, RulePredicate

DEFAULT_SEED = 7


def default_schema() -> FeatureSchema:
    """Five-feature clinical schema with tunable cut-off ladders."""
    count_ladders = {1: (3.0,), 2: (3.0, 7.0), 3: (1.0, 3.0, 7.0)}
    return FeatureSchema(
        [
            FeatureSpec(
                "HospitalStay", "continuous", (1.0, 3.0, 7.0),
                unit="days", ladders=count_ladders,
            ),
            FeatureSpec("TumourNumber", "continuous", (1.0, 3.0, 7.0), ladders=count_ladders),
            FeatureSpec(
                "EQ5DScore", "continuous", (0.41, 0.49, 0.76),
                ladders={1: (0.41,), 2: (0.41, 0.49), 3: (0.41, 0.49, 0.76)},
            ),
            FeatureSpec("SurgeonGrade", "categorical", categories=("Consultant", "Registrar", "Other")),
            FeatureSpec("SmokingStatus", "categorical", categories=("never", "former", "current")),
        ]
    )


def default_samplers() -> dict[str, dict]:
    """Value distributions for the schema features plus the extra clinical
    columns consumed by the EORTC scorer (which the binarizer ignores)."""
    return {
        # Integer day/count ranges put the >3 cutoff at P=2/3 and split the
        # >7 cutoff evenly within that region.
        "HospitalStay": {"kind": "uniform_int", "low": 0, "high": 11},
        "TumourNumber": {"kind": "uniform_int", "low": 0, "high": 11},
        # Segment weights pin the three cutoff marginals near one half while
        # keeping the 0.41-0.49 band at 8%.
        "EQ5DScore": {
            "kind": "piecewise",
            "breakpoints": [0.0, 0.41, 0.49, 0.76, 1.0],
            "probs": [0.42, 0.08, 0.08, 0.42],
        },
        "SurgeonGrade": {
            "kind": "categorical",
            "categories": ["Consultant", "Registrar", "Other"],
            "probs": [0.5, 0.25, 0.25],
        },
        "SmokingStatus": {
            "kind": "categorical",
            "categories": ["never", "former", "current"],
            "probs": [0.4, 0.35, 0.25],
        },
        # Extra columns for the EORTC factor mapping.
        "TumourSizeCm": {"kind": "uniform", "low": 0.5, "high": 6.0},
        "PriorRecurrenceRate": {
            "kind": "categorical",
            "categories": ["primary", "le1_per_year", "gt1_per_year"],
            "probs": [0.6, 0.25, 0.15],
        },
        "TCategory": {"kind": "categorical", "categories": ["Ta", "T1"], "probs": [0.7, 0.3]},
        "CIS": {"kind": "bernoulli", "p": 0.15},
        "Grade": {
            "kind": "categorical",
            "categories": ["G1", "G2", "G3"],
            "probs": [0.35, 0.45, 0.2],
        },
    }


def default_rules() -> tuple[PlantedRule, ...]:
    """Planted ground truth mirroring the published example clauses."""
    return (
        PlantedRule(
            name="C149-analog",
            predicates=(
                RulePredicate("HospitalStay", ">", 3),
                RulePredicate("TumourNumber", ">", 3),
            ),
            label=1,
            weight=3.0,
        ),
        PlantedRule(
            name="C73-analog",
            predicates=(
                RulePredicate("EQ5DScore", ">", 0.41),
                RulePredicate("EQ5DScore", "<=", 0.49),
                RulePredicate("SurgeonGrade", "!=", "Consultant"),
            ),
            label=1,
            weight=2.0,
        ),
        PlantedRule(
            name="C63-analog",
            predicates=(RulePredicate("SurgeonGrade", "=", "Consultant"),),
            label=0,
            weight=1.0,
        ),
    )


def default_cohort_config(
    n: int = 330,
    positive_fraction: float = 0.40,
    noise_rate: float = 0.05,
    seed: int = DEFAULT_SEED,
) -> CohortConfig:
    return CohortConfig(
        n=n,
        positive_fraction=positive_fraction,
        noise_rate=noise_rate,
        seed=seed,
        rules=default_rules(),
        samplers=default_samplers(),
    )

import numpy as np
import pytest

from tmclin.defaults import default_cohort_config, default_rules, default_samplers, default_schema
from tmclin.errors import CohortError, SchemaError
from tmclin.evaluation import stratified_split
from tmclin.schema import PatientRecord, binarize_dataset, load_records_csv, write_records_csv
from tmclin.synth import (
    CohortConfig,
    PlantedRule,
    RulePredicate,
    compile_rule,
    generate_cohort,
    oracle_label,
    sample_value,
)
from tmclin.tm import TMModel, TMParams, fit, predict_dataset


@pytest.fixture(scope="module")
def schema():
    return default_schema()


def always_positive_rule():
    return PlantedRule("always", predicates=(), label=1, weight=1.0)


class TestCompileRule:
    def test_compiles_to_declared_bits(self, schema):
        rule = default_rules()[0]  # HospitalStay > 3 AND TumourNumber > 3
        compiled = compile_rule(rule, schema)
        assert compiled == (
            (schema.raw_bit_index("HospitalStay", cutoff=3), True),
            (schema.raw_bit_index("TumourNumber", cutoff=3), True),
        )

    def test_band_rule_uses_negated_requirement(self, schema):
        rule = default_rules()[1]  # EQ5D band + SurgeonGrade != Consultant
        compiled = compile_rule(rule, schema)
        assert compiled[1] == (schema.raw_bit_index("EQ5DScore", cutoff=0.49), False)
        assert compiled[2] == (schema.raw_bit_index("SurgeonGrade", category="Consultant"), False)

    def test_undeclared_cutoff_rejected(self, schema):
        rule = PlantedRule("bad", (RulePredicate("HospitalStay", ">", 4),), label=1)
        with pytest.raises(SchemaError):
            compile_rule(rule, schema)

    def test_wrong_op_rejected(self, schema):
        rule = PlantedRule("bad", (RulePredicate("SurgeonGrade", ">", "Consultant"),), label=1)
        with pytest.raises(SchemaError):
            compile_rule(rule, schema)


class TestOracleLabel:
    def record(self, schema, **overrides):
        values = {
            "HospitalStay": 0,
            "TumourNumber": 0,
            "EQ5DScore": 0.9,
            "SurgeonGrade": "Registrar",
            "SmokingStatus": "never",
        }
        values.update(overrides)
        return PatientRecord(values)

    def test_rule_match_positive(self, schema):
        record = self.record(schema, HospitalStay=5, TumourNumber=4)
        assert oracle_label(record, default_rules(), schema) == 1

    def test_no_match_background(self, schema):
        record = self.record(schema)
        assert oracle_label(record, default_rules(), schema) == 0
        assert oracle_label(record, default_rules(), schema, background_label=1) == 1

    def test_higher_weight_wins(self, schema):
        # C149 (weight 3, label 1) vs C63 (weight 1, label 0) both match
        record = self.record(schema, HospitalStay=5, TumourNumber=4, SurgeonGrade="Consultant")
        assert oracle_label(record, default_rules(), schema) == 1

    def test_weight_tie_goes_positive(self, schema):
        rules = (
            PlantedRule("neg", (RulePredicate("SurgeonGrade", "=", "Registrar"),), label=0, weight=2.0),
            PlantedRule("pos", (RulePredicate("SmokingStatus", "=", "never"),), label=1, weight=2.0),
        )
        assert oracle_label(self.record(schema), rules, schema) == 1


class TestSamplers:
    def test_kinds(self):
        rng = np.random.default_rng(0)
        assert 0 <= sample_value({"kind": "uniform_int", "low": 0, "high": 5}, rng) <= 5
        assert 0.0 <= sample_value({"kind": "uniform", "low": 0, "high": 1}, rng) <= 1.0
        assert sample_value({"kind": "categorical", "categories": ["a", "b"], "probs": [1.0, 0.0]}, rng) == "a"
        assert sample_value({"kind": "bernoulli", "p": 0.0}, rng) is False
        value = sample_value(
            {"kind": "piecewise", "breakpoints": [0, 0.5, 1.0], "probs": [0.0, 1.0]}, rng
        )
        assert 0.5 <= value <= 1.0

    def test_unknown_kind(self):
        with pytest.raises(CohortError):
            sample_value({"kind": "zipf"}, np.random.default_rng(0))


class TestGenerateCohort:
    def test_always_positive_rule_fills_cohort(self, schema):
        config = CohortConfig(
            n=10,
            positive_fraction=1.0,
            noise_rate=0.0,
            seed=0,
            rules=(always_positive_rule(),),
            samplers=default_samplers(),
        )
        records = generate_cohort(config, schema)
        assert [r.label for r in records] == [1] * 10

    def test_unsatisfiable_fraction_reports_achieved(self, schema):
        config = CohortConfig(
            n=10,
            positive_fraction=0.5,
            noise_rate=0.0,
            seed=0,
            rules=(always_positive_rule(),),
            samplers=default_samplers(),
            max_resample=50,
        )
        with pytest.raises(CohortError, match="achieved"):
            generate_cohort(config, schema)

    def test_default_balance_across_seeds(self, schema):
        fractions = []
        for seed in range(10):
            records = generate_cohort(default_cohort_config(seed=seed), schema)
            fractions.append(sum(r.label for r in records) / len(records))
        mean = sum(fractions) / len(fractions)
        assert abs(mean - 0.40) <= 0.03
        assert all(abs(f - 0.40) <= 0.06 for f in fractions)

    def test_pre_noise_balance_is_exact(self, schema):
        records = generate_cohort(default_cohort_config(noise_rate=0.0, seed=4), schema)
        assert sum(r.label for r in records) == round(330 * 0.40)

    def test_noise_free_cohort_matches_oracle_exactly(self, schema):
        config = default_cohort_config(noise_rate=0.0, seed=2)
        records = generate_cohort(config, schema)
        for record in records:
            assert record.label == oracle_label(record, config.rules, schema, config.background_label)

    def test_determinism_and_csv_bytes(self, tmp_path, schema):
        config = default_cohort_config(seed=11)
        a = generate_cohort(config, schema)
        b = generate_cohort(config, schema)
        assert a == b
        pa, pb = tmp_path / "a.csv", tmp_path / "b.csv"
        write_records_csv(pa, a, schema)
        write_records_csv(pb, b, schema)
        assert pa.read_bytes() == pb.read_bytes()

    def test_round_trips_through_binarizer(self, tmp_path, schema):
        records = generate_cohort(default_cohort_config(seed=3), schema)
        path = tmp_path / "cohort.csv"
        write_records_csv(path, records, schema)
        loaded = load_records_csv(path, schema)
        X, y = binarize_dataset(loaded, schema)
        assert X.shape == (330, schema.n_literals)
        assert set(np.unique(y)) == {0, 1}

    def test_missing_sampler_rejected(self, schema):
        config = CohortConfig(rules=default_rules(), samplers={"HospitalStay": {"kind": "uniform", "low": 0, "high": 1}})
        with pytest.raises(CohortError, match="sampler"):
            generate_cohort(config, schema)

    def test_n_below_two_rejected(self):
        with pytest.raises(CohortError):
            CohortConfig(n=1)

    def test_config_json_round_trip(self):
        config = default_cohort_config(seed=5)
        doc = config.to_json_dict()
        restored = CohortConfig.from_json_dict(doc)
        assert restored == config


def test_no_learner_beats_bayes_bound(schema=None):
    """Leakage guard: with noise rate eps the Bayes accuracy is 1 - eps; a
    learner evaluated on a large fresh cohort must not exceed it by more
    than sampling error."""
    schema = default_schema()
    train_records = generate_cohort(default_cohort_config(seed=0), schema)
    X, y = binarize_dataset(train_records, schema)
    model = TMModel.initialize(schema, TMParams(seed=0))
    fit(model, X, y)

    big = generate_cohort(default_cohort_config(n=2000, seed=123), schema)
    X_big, y_big = binarize_dataset(big, schema)
    accuracy = float((predict_dataset(model, X_big) == y_big).mean())
    eps = 0.05
    margin = 3 * np.sqrt(eps * (1 - eps) / 2000)
    assert accuracy <= (1 - eps) + margin

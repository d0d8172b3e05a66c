"""Interpretable Tsetlin Machine toolkit for clinical tabular classification."""

from .baselines import (
    EORTCFactors,
    EORTCResult,
    LRModel,
    LRParams,
    eortc_predict,
    eortc_recurrence_score,
    lr_fit,
    lr_predict,
)
from .errors import (
    CohortError,
    DataError,
    FingerprintMismatchError,
    NotTrainedError,
    SchemaError,
    TmclinError,
)
from .evaluation import (
    ConfusionMatrix,
    MetricsReport,
    compute_metrics,
    evaluate_model,
    stratified_kfold,
    stratified_split,
)
from .interpret import (
    ClauseActivationMatrix,
    ClauseImportance,
    ReadableClause,
    activation_matrix,
    clause_importance,
    export_heatmap_data,
    extract_rules,
)
from .schema import (
    FeatureSchema,
    FeatureSpec,
    PatientRecord,
    binarize_dataset,
    binarize_record,
    load_records_csv,
    load_schema,
    one_hot_encode,
    save_schema,
    thermometer_encode,
    write_records_csv,
)
from .serialize import TOOL_VERSION as __version__
from .synth import CohortConfig, PlantedRule, RulePredicate, generate_cohort, oracle_label
from .tm import (
    Clause,
    LearningCurve,
    TMModel,
    TMParams,
    class_sum,
    clause_eval,
    fit,
    fit_epoch,
    load_model,
    predict,
    predict_dataset,
    save_model,
    type_i_feedback,
    type_ii_feedback,
)
from .tuning import SearchSpace, SearchResult, TrialResult, random_search

__all__ = [
    "__version__",
    # errors
    "TmclinError", "SchemaError", "DataError", "NotTrainedError",
    "FingerprintMismatchError", "CohortError",
    # schema
    "FeatureSpec", "FeatureSchema", "PatientRecord",
    "thermometer_encode", "one_hot_encode", "binarize_record", "binarize_dataset",
    "save_schema", "load_schema", "load_records_csv", "write_records_csv",
    # tm
    "TMParams", "TMModel", "Clause", "LearningCurve",
    "clause_eval", "class_sum", "predict", "predict_dataset",
    "type_i_feedback", "type_ii_feedback", "fit_epoch", "fit",
    "save_model", "load_model",
    # interpret
    "ReadableClause", "ClauseActivationMatrix", "ClauseImportance",
    "extract_rules", "activation_matrix", "clause_importance", "export_heatmap_data",
    # baselines
    "EORTCFactors", "EORTCResult", "eortc_recurrence_score", "eortc_predict",
    "LRParams", "LRModel", "lr_fit", "lr_predict",
    # evaluation
    "ConfusionMatrix", "MetricsReport", "compute_metrics",
    "stratified_split", "stratified_kfold", "evaluate_model",
    # tuning
    "SearchSpace", "TrialResult", "SearchResult", "random_search",
    # synth
    "PlantedRule", "RulePredicate", "CohortConfig", "generate_cohort", "oracle_label",
]

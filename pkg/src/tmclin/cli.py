"""Command-line entry point.

Subcommands: generate | train | evaluate | explain | tune. Every command is
deterministic given its flags: the default seed is the fixed constant 7 and
all artifacts carry a provenance field (tool version, seed, config hash)
instead of timestamps, so identical invocations produce byte-identical
files. Exit code is 0 iff every requested artifact was written.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

import numpy as np

from .baselines import (
    DEFAULT_OPERATING_THRESHOLD,
    eortc_predict_dataset,
    lr_fit,
    lr_predict_dataset,
)
from .defaults import DEFAULT_SEED, default_cohort_config, default_schema
from .errors import DataError, TmclinError
from .evaluation import compute_metrics, stratified_kfold, stratified_split
from .interpret import activation_matrix, export_heatmap_data, extract_rules
from .schema import (
    FeatureSchema,
    binarize_dataset,
    load_records_csv,
    load_schema,
    save_schema,
)
from .serialize import provenance, provenance_comments, read_json, write_json
from .synth import CohortConfig, generate_cohort
from .tm import TMModel, TMParams, check_schema_match, fit, load_model, predict_dataset, save_model
from .tuning import DEFAULT_COMPLEXITY_PENALTY, SearchSpace, random_search


def _load_schema_arg(args: argparse.Namespace) -> FeatureSchema:
    if args.schema is None:
        return default_schema()
    return load_schema(args.schema)


def _config_dict(args: argparse.Namespace) -> dict:
    # The output directory is not part of the run's semantic configuration;
    # including it would make otherwise-identical runs hash differently.
    resolved = {}
    for key, value in sorted(vars(args).items()):
        if key in ("func", "out"):
            continue
        resolved[key] = str(value) if isinstance(value, Path) else value
    return resolved


def _out_dir(args: argparse.Namespace) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# generate


def cmd_generate(args: argparse.Namespace) -> int:
    schema = _load_schema_arg(args)
    if args.config is not None:
        config = CohortConfig.from_json_dict(read_json(args.config))
    else:
        config = default_cohort_config()
    config = dataclasses.replace(
        config,
        n=args.n if args.n is not None else config.n,
        positive_fraction=args.pos_frac if args.pos_frac is not None else config.positive_fraction,
        noise_rate=args.noise if args.noise is not None else config.noise_rate,
        seed=args.seed,
    )
    records = generate_cohort(config, schema)
    achieved = sum(r.label for r in records) / len(records)

    out = _out_dir(args)
    prov = provenance(args.seed, _config_dict(args))
    from .schema import write_records_csv

    write_records_csv(out / "cohort.csv", records, schema, provenance_comments(prov))
    save_schema(schema, out / "schema.json")
    write_json(
        out / "manifest.json",
        {
            "provenance": prov,
            "config": config.to_json_dict(),
            "schema_fingerprint": schema.fingerprint(),
            "n": config.n,
            "achieved_positive_fraction": achieved,
        },
    )
    print(f"wrote {out / 'cohort.csv'} ({config.n} records, positive fraction {achieved:.3f})")
    return 0


# ---------------------------------------------------------------------------
# train


def _tm_params_from_args(args: argparse.Namespace) -> TMParams:
    return TMParams(
        num_clauses=args.clauses,
        T=args.threshold,
        s=args.specificity,
        epochs=args.epochs,
        n_states=args.n_states,
        seed=args.seed,
    )


def cmd_train(args: argparse.Namespace) -> int:
    schema = _load_schema_arg(args)
    records = load_records_csv(args.data, schema)
    X, y = binarize_dataset(records, schema)
    train_idx, test_idx = stratified_split(y, args.test_fraction, args.seed)

    params = _tm_params_from_args(args)
    prov = provenance(args.seed, _config_dict(args))
    model = TMModel.initialize(schema, params)
    model.provenance = prov
    curve = fit(model, X[train_idx], y[train_idx], X[test_idx], y[test_idx])

    out = _out_dir(args)
    save_model(model, out / "model.json")
    curve.write_csv(out / "curve.csv", provenance_comments(prov))
    metrics = compute_metrics(predict_dataset(model, X[test_idx]), y[test_idx])
    write_json(
        out / "metrics.json",
        {
            "provenance": prov,
            "split": {"train": len(train_idx), "test": len(test_idx)},
            "test_metrics": metrics.to_json_dict(),
        },
    )
    print(
        f"wrote {out / 'model.json'} "
        f"(test macro-F1 {metrics.macro_f1:.3f}, accuracy {metrics.accuracy:.3f})"
    )
    return 0


# ---------------------------------------------------------------------------
# evaluate


def _model_rows(args, schema, records, X, y, train_idx, test_idx) -> list[tuple[str, dict]]:
    names = [m.strip() for m in args.models.split(",") if m.strip()]
    rows: list[tuple[str, dict]] = []
    for name in names:
        if name == "tm":
            if args.model is None:
                raise DataError("model 'tm' requested but no --model given")
            model = load_model(args.model)
            check_schema_match(model, schema)
            preds = predict_dataset(model, X[test_idx])
        elif name == "lr":
            lr = lr_fit(X[train_idx], y[train_idx])
            preds, _ = lr_predict_dataset(lr, X[test_idx])
        elif name == "eortc":
            test_records = [records[i] for i in test_idx]
            preds = eortc_predict_dataset(test_records, args.eortc_threshold)
        else:
            raise DataError(f"unknown model {name!r} (expected tm, lr, eortc)")
        rows.append((name, compute_metrics(preds, y[test_idx]).to_json_dict()))
    return rows


def _model_rows_cv(args, schema, records, X, y, train_idx) -> list[tuple[str, dict]]:
    names = [m.strip() for m in args.models.split(",") if m.strip()]
    tm_params = None
    if "tm" in names:
        if args.model is None:
            raise DataError("model 'tm' requested but no --model given")
        saved = load_model(args.model)
        check_schema_match(saved, schema)
        tm_params = saved.params
    folds = stratified_kfold(y[train_idx], args.cv, args.seed)
    per_model: dict[str, list[dict]] = {name: [] for name in names}
    for fold_train, fold_test in folds:
        tr = train_idx[fold_train]
        te = train_idx[fold_test]
        for name in names:
            if name == "tm":
                model = TMModel.initialize(schema, tm_params)
                fit(model, X[tr], y[tr])
                preds = predict_dataset(model, X[te])
            elif name == "lr":
                lr = lr_fit(X[tr], y[tr])
                preds, _ = lr_predict_dataset(lr, X[te])
            elif name == "eortc":
                preds = eortc_predict_dataset([records[i] for i in te], args.eortc_threshold)
            else:
                raise DataError(f"unknown model {name!r} (expected tm, lr, eortc)")
            per_model[name].append(compute_metrics(preds, y[te]).to_json_dict())
    rows = []
    for name in names:
        fold_reports = per_model[name]
        mean_report = {
            key: sum(r[key] for r in fold_reports) / len(fold_reports)
            for key in ("accuracy", "macro_precision", "macro_recall", "macro_f1")
        }
        mean_report["folds"] = fold_reports
        rows.append((name, mean_report))
    return rows


def cmd_evaluate(args: argparse.Namespace) -> int:
    schema = _load_schema_arg(args)
    records = load_records_csv(args.data, schema)
    X, y = binarize_dataset(records, schema)
    train_idx, test_idx = stratified_split(y, args.test_fraction, args.seed)

    if args.cv:
        rows = _model_rows_cv(args, schema, records, X, y, train_idx)
    else:
        rows = _model_rows(args, schema, records, X, y, train_idx, test_idx)

    out = _out_dir(args)
    prov = provenance(args.seed, _config_dict(args))
    lines = provenance_comments(prov)
    lines.append("model,macro_precision,macro_recall,macro_f1,accuracy")
    for name, report in rows:
        lines.append(
            f"{name},{report['macro_precision']!r},{report['macro_recall']!r},"
            f"{report['macro_f1']!r},{report['accuracy']!r}"
        )
    (out / "comparison.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    write_json(
        out / "comparison.json",
        {"provenance": prov, "mode": f"cv{args.cv}" if args.cv else "holdout",
         "models": {name: report for name, report in rows}},
    )
    print(f"wrote {out / 'comparison.csv'} ({len(rows)} model(s))")
    return 0


# ---------------------------------------------------------------------------
# explain


def cmd_explain(args: argparse.Namespace) -> int:
    schema = _load_schema_arg(args)
    model = load_model(args.model)
    check_schema_match(model, schema)
    records = load_records_csv(args.data, schema)
    X, y = binarize_dataset(records, schema)

    rules = extract_rules(model, schema, X)
    matrix = activation_matrix(model, X, y)
    out = _out_dir(args)
    prov = provenance(args.seed, _config_dict(args))

    rule_lines = [f"C{rule.clause_id}: {rule.text()}" for rule in rules]
    (out / "rules.txt").write_text("\n".join(rule_lines) + "\n", encoding="utf-8")
    export_heatmap_data(
        matrix,
        rules,
        args.top_k,
        out / "heatmap.csv",
        out / "heatmap_legend.json",
        provenance_comments(prov),
    )
    written = [out / "rules.txt", out / "heatmap.csv", out / "heatmap_legend.json"]

    if args.patient is not None:
        if not 0 <= args.patient < len(records):
            raise DataError(f"patient index {args.patient} outside [0, {len(records)})")
        fired = [rules[c] for c in range(matrix.n_clauses) if matrix.fired[args.patient, c]]
        lines = [
            f"patient {args.patient}: true label {int(matrix.true_labels[args.patient])}, "
            f"predicted {int(matrix.predicted_labels[args.patient])}",
            f"fired clauses ({len(fired)}):",
        ]
        lines += [f"  C{rule.clause_id}: {rule.text()}" for rule in fired]
        text = "\n".join(lines) + "\n"
        (out / f"patient_{args.patient}.txt").write_text(text, encoding="utf-8")
        written.append(out / f"patient_{args.patient}.txt")
        print(text, end="")
    print(f"wrote {', '.join(str(p) for p in written)}")
    return 0


# ---------------------------------------------------------------------------
# tune


def cmd_tune(args: argparse.Namespace) -> int:
    schema = _load_schema_arg(args)
    records = load_records_csv(args.data, schema)
    _, y = binarize_dataset(records, schema)
    train_idx, _test_idx = stratified_split(y, args.test_fraction, args.seed)
    inner_train, inner_val = stratified_split(y[train_idx], args.test_fraction, args.seed)

    space = SearchSpace() if args.space is None else SearchSpace.from_json_dict(read_json(args.space))
    result = random_search(
        space,
        args.trials,
        schema,
        [records[i] for i in train_idx[inner_train]],
        [records[i] for i in train_idx[inner_val]],
        args.seed,
        complexity_penalty=args.penalty,
    )

    out = _out_dir(args)
    prov = provenance(args.seed, _config_dict(args))
    write_json(out / "trials.json", {"provenance": prov, "space": space.to_json_dict(),
                                     **result.to_json_dict()})
    best = result.best
    write_json(out / "best_params.json", {"provenance": prov, **best.to_json_dict()})
    written = [out / "trials.json", out / "best_params.json"]

    if args.retrain:
        if not isinstance(best.params, TMParams):
            raise DataError("cannot retrain: every trial failed")
        variant = schema.with_n_bins(best.n_bins)
        X, y_all = binarize_dataset(records, variant)
        model = TMModel.initialize(variant, best.params)
        model.provenance = prov
        fit(model, X[train_idx], y_all[train_idx])
        save_model(model, out / "model.json")
        save_schema(variant, out / "tuned_schema.json")
        written += [out / "model.json", out / "tuned_schema.json"]

    print(
        f"wrote {', '.join(str(p) for p in written)} "
        f"(best objective {best.objective:.4f} at trial {best.index})"
    )
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tmclin",
        description="Interpretable Tsetlin Machine toolkit for clinical tabular data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_shared(p: argparse.ArgumentParser, *, schema=False, data=False, model=False) -> None:
        if schema:
            p.add_argument("--schema", type=Path, default=None,
                           help="schema JSON (default: built-in PHOTO-like schema)")
        if data:
            p.add_argument("--data", type=Path, required=True, help="data CSV")
        if model:
            p.add_argument("--model", type=Path, default=None, help="model JSON")
        p.add_argument("--out", type=Path, required=True, help="output directory")
        p.add_argument("--seed", type=int, default=DEFAULT_SEED,
                       help=f"RNG seed (default {DEFAULT_SEED})")

    p = sub.add_parser("generate", help="generate a synthetic cohort CSV + manifest")
    add_shared(p, schema=True)
    p.add_argument("--config", type=Path, default=None, help="cohort config JSON")
    p.add_argument("--n", type=int, default=None, help="cohort size (default 330)")
    p.add_argument("--pos-frac", type=float, default=None, dest="pos_frac",
                   help="target positive fraction (default 0.40)")
    p.add_argument("--noise", type=float, default=None, help="label noise rate (default 0.05)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("train", help="stratified split, train the TM, write artifacts")
    add_shared(p, schema=True, data=True)
    p.add_argument("--clauses", type=int, default=80, help="total clause count, even (default 80)")
    p.add_argument("--threshold", "-T", type=int, default=38, dest="threshold",
                   help="voting threshold T (default 38)")
    p.add_argument("--specificity", "-s", type=float, default=4.0, dest="specificity",
                   help="specificity s (default 4.0)")
    p.add_argument("--epochs", type=int, default=100, help="training epochs (default 100)")
    p.add_argument("--n-states", type=int, default=100, dest="n_states",
                   help="automaton states per action (default 100)")
    p.add_argument("--test-fraction", type=float, default=0.2, dest="test_fraction")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="compare TM/LR/EORTC on one split")
    add_shared(p, schema=True, data=True, model=True)
    p.add_argument("--models", type=str, default=None,
                   help="comma list among tm,lr,eortc (default: all if --model given)")
    p.add_argument("--eortc-threshold", type=int, default=DEFAULT_OPERATING_THRESHOLD,
                   dest="eortc_threshold",
                   help="risk-group index counted as predicted recurrence (default 2 = group 5-9)")
    p.add_argument("--test-fraction", type=float, default=0.2, dest="test_fraction")
    p.add_argument("--cv", type=int, default=0,
                   help="optional stratified k-fold mode over the training split")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("explain", help="export readable rules and heatmap data")
    add_shared(p, schema=True, data=True, model=True)
    p.add_argument("--top-k", type=int, default=20, dest="top_k",
                   help="clauses in the heatmap, by |importance| (default 20)")
    p.add_argument("--patient", type=int, default=None,
                   help="also explain one patient row by index")
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("tune", help="seeded random hyperparameter search")
    add_shared(p, schema=True, data=True)
    p.add_argument("--trials", type=int, default=50, help="number of trials (default 50)")
    p.add_argument("--space", type=Path, default=None, help="search space JSON")
    p.add_argument("--penalty", type=float, default=DEFAULT_COMPLEXITY_PENALTY,
                   help="complexity penalty weight (default 0.05)")
    p.add_argument("--retrain", action="store_true",
                   help="train a final model with the winning parameters")
    p.add_argument("--test-fraction", type=float, default=0.2, dest="test_fraction")
    p.set_defaults(func=cmd_tune)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "evaluate" and args.models is None:
        args.models = "tm,lr,eortc" if args.model is not None else "lr,eortc"
    if args.command == "explain" and args.model is None:
        parser.error("explain requires --model")
    try:
        return args.func(args)
    except TmclinError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

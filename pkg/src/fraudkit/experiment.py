"""Experiment runner: the fixed pipeline
load -> outlier pruning -> stratified split -> optional scaling ->
optional SMOTE (train only) -> fit models -> score test -> metrics grid,
plus the transaction-screening flow and artifact export.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from . import baselines, cleanse, gbdt, metrics, plots, resample, tabular
from .config import (
    SEED_OFFSET_MODEL,
    SEED_OFFSET_SPLIT,
    SEED_OFFSET_TSNE,
    ExperimentConfig,
)
from .embed import Embedding, run_tsne, write_embedding_csv
from .errors import FraudkitError, SchemaMismatch, StageError
from .resample import SmoteParams

_FMT = ".17g"


@dataclass
class RunReport:
    """One metrics row per (model x smote-variant) plus dataset provenance."""

    rows: list                     # (name, precision, recall, f1, roc_auc)
    rows_before_cleaning: int
    rows_after_cleaning: int
    class_counts_train: tuple      # (n0, n1) before SMOTE
    class_counts_smote: tuple | None  # after SMOTE, if any variant used it


@dataclass
class ScreeningDecision:
    index: int
    score: float
    decision: str                  # "approve" | "review"


@dataclass
class RunState:
    """Everything export_artifacts needs, kept after run_experiment."""

    config: ExperimentConfig
    report: RunReport
    roc_curves: list = field(default_factory=list)       # (name, RocCurve)
    scores: dict = field(default_factory=dict)           # name -> np.ndarray
    test_labels: np.ndarray = None
    test_dataset: tabular.Dataset = None
    cleaning_report: cleanse.RemovalReport = None
    correlation: np.ndarray = None
    correlation_names: list = None
    embedding: Embedding | None = None
    embedding_labels: np.ndarray = None
    smote_audit: list = field(default_factory=list)
    gbdt_models: dict = field(default_factory=dict)      # variant -> GbdtModel


def _fit_and_score(name, cfg, train, test_rows):
    """Returns (scores, model) where model is the fitted GBDT for the two
    boosted variants (their blobs are exported) and None otherwise."""
    if name == "knn":
        return baselines.knn_score_batch(train, test_rows, cfg.knn), None
    if name == "logreg":
        model = baselines.logreg_fit(train, seed=cfg.seed + SEED_OFFSET_MODEL,
                                     **cfg.logreg)
        return baselines.logreg_score_batch(model, test_rows), None
    if name == "cart":
        tree = baselines.cart_fit(train, cfg.cart)
        return baselines.cart_score_batch(tree, test_rows), None
    if name == "gbdt_leafwise":
        model = gbdt.train_gbdt(train, cfg.gbdt_params("leaf_wise"))
        return model.predict_scores(test_rows), model
    if name == "gbdt_levelwise":
        model = gbdt.train_gbdt(train, cfg.gbdt_params("level_wise"))
        return model.predict_scores(test_rows), model
    raise FraudkitError(f"unknown model {name!r}")


def _stage(stage_name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except FraudkitError as exc:
        raise StageError(stage_name, exc) from exc


def run_experiment(config: ExperimentConfig,
                   write_outputs: bool = True) -> RunState:
    """Execute the full pipeline and (by default) export all artifacts."""
    config.validate()
    ds = _stage("load", tabular.load_csv, config.data_path, config.label_column)

    if config.outlier_features:
        cleaned, cleaning_report = _stage(
            "outlier_pruning", cleanse.prune_class_outliers,
            ds, config.outlier_features, target_class=1,
            multiplier=config.outlier_multiplier,
            recompute_fences=config.recompute_fences)
    else:
        cleaned = ds
        cleaning_report = cleanse.RemovalReport(
            fences={}, removed_row_indices=[],
            rows_before=ds.n_rows, rows_after=ds.n_rows)

    split = _stage("split", tabular.stratified_split, cleaned,
                   config.test_fraction, config.seed + SEED_OFFSET_SPLIT)
    if config.scaling:
        split, _ = _stage("scaling", tabular.minmax_scale, split)

    train_plain = split.train
    test = split.test

    train_smote = None
    smote_counts = None
    smote_audit = []
    if True in config.smote_variants():
        params = SmoteParams(k=config.smote.k,
                             target_ratio=config.smote.target_ratio,
                             seed=config.smote.seed)
        train_smote = _stage("smote", resample.smote_balance,
                             train_plain, params, audit=smote_audit)
        smote_counts = train_smote.class_counts()

    rows = []
    roc_curves = []
    score_map = {}
    gbdt_models = {}
    for name in config.models:
        for use_smote in config.smote_variants():
            variant = f"{name}+smote" if use_smote else name
            train = train_smote if use_smote else train_plain
            scores, fitted = _stage(variant, _fit_and_score, name, config,
                                    train, test.rows)
            if fitted is not None:
                gbdt_models[variant] = fitted
            rep = _stage(variant, metrics.evaluate, test.labels, scores,
                         config.threshold)
            rows.append((variant, rep.precision, rep.recall, rep.f1, rep.roc_auc))
            roc_curves.append((variant, metrics.roc_curve(test.labels, scores)))
            score_map[variant] = np.asarray(scores, dtype=np.float64)

    report = RunReport(
        rows=rows,
        rows_before_cleaning=cleaning_report.rows_before,
        rows_after_cleaning=cleaning_report.rows_after,
        class_counts_train=train_plain.class_counts(),
        class_counts_smote=smote_counts,
    )

    corr, corr_names = _correlation_matrix(cleaned, config.label_column)

    embedding = None
    emb_labels = None
    if config.tsne_enabled:
        sub = _tsne_subsample(train_plain, config.tsne_max_points,
                              config.seed + SEED_OFFSET_TSNE)
        embedding = _stage("tsne", run_tsne, sub.rows, config.tsne)
        emb_labels = sub.labels

    state = RunState(config=config, report=report, roc_curves=roc_curves,
                     scores=score_map, test_labels=test.labels,
                     test_dataset=test, cleaning_report=cleaning_report,
                     correlation=corr, correlation_names=corr_names,
                     embedding=embedding, embedding_labels=emb_labels,
                     smote_audit=smote_audit, gbdt_models=gbdt_models)
    if write_outputs:
        export_artifacts(state, config.output_dir)
    return state


def _tsne_subsample(ds, max_points, seed):
    if ds.n_rows <= max_points:
        return ds
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(ds.n_rows, size=max_points, replace=False))
    return ds.subset(idx)


def _correlation_matrix(ds, label_column):
    """Pearson matrix over features plus the label column; constant columns
    correlate as 0 off-diagonal, 1 on the diagonal."""
    stacked = np.column_stack([ds.rows, ds.labels.astype(np.float64)])
    with np.errstate(invalid="ignore", divide="ignore"):
        corr = np.corrcoef(stacked, rowvar=False)
    corr = np.nan_to_num(corr, nan=0.0)
    np.fill_diagonal(corr, 1.0)
    return corr, list(ds.feature_names) + [label_column]


def export_artifacts(state: RunState, outdir) -> list:
    """Write the report grid and all audit CSVs (plus figures); returns the
    list of written paths."""
    os.makedirs(outdir, exist_ok=True)
    written = []

    def emit(name, writer):
        path = os.path.join(outdir, name)
        writer(path)
        written.append(path)

    def write_report(path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("model,precision,recall,f1,roc_auc\n")
            for name, p, r, f1, auc in state.report.rows:
                fh.write(f"{name},{format(p, _FMT)},{format(r, _FMT)},"
                         f"{format(f1, _FMT)},{format(auc, _FMT)}\n")
    emit("report.csv", write_report)

    for name, curve in state.roc_curves:
        emit(f"roc_{name.replace('+', '_')}.csv", curve.write_csv)
    for name, scores in state.scores.items():
        def write_scores(path, scores=scores):
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write("label,score\n")
                for lab, s in zip(state.test_labels, scores):
                    fh.write(f"{int(lab)},{format(s, _FMT)}\n")
        emit(f"scores_{name.replace('+', '_')}.csv", write_scores)

    def write_cleaning(path):
        rep = state.cleaning_report
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("feature,q1,q3,lower,upper,removed_count\n")
            for feat, f in rep.fences.items():
                removed = rep.removed_per_feature.get(feat, 0)
                fh.write(f"{feat},{format(f.q1, _FMT)},{format(f.q3, _FMT)},"
                         f"{format(f.lower, _FMT)},{format(f.upper, _FMT)},"
                         f"{removed}\n")
    emit("cleaning.csv", write_cleaning)

    def write_correlation(path):
        names = state.correlation_names
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("," + ",".join(names) + "\n")
            for i, name in enumerate(names):
                cells = ",".join(format(v, _FMT) for v in state.correlation[i])
                fh.write(f"{name},{cells}\n")
    emit("correlation.csv", write_correlation)

    def write_provenance(path):
        rep = state.report
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("key,value\n")
            fh.write(f"rows_before_cleaning,{rep.rows_before_cleaning}\n")
            fh.write(f"rows_after_cleaning,{rep.rows_after_cleaning}\n")
            fh.write(f"train_class0,{rep.class_counts_train[0]}\n")
            fh.write(f"train_class1,{rep.class_counts_train[1]}\n")
            if rep.class_counts_smote is not None:
                fh.write(f"smote_class0,{rep.class_counts_smote[0]}\n")
                fh.write(f"smote_class1,{rep.class_counts_smote[1]}\n")
    emit("provenance.csv", write_provenance)

    emit("test_partition.csv",
         lambda path: tabular.save_csv(state.test_dataset, path,
                                       state.config.label_column))

    for variant, model in state.gbdt_models.items():
        def write_blob(path, model=model):
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(gbdt.save_model(model))
        emit(f"model_{variant.replace('+', '_')}.txt", write_blob)

    if state.smote_audit:
        emit("smote_audit.csv",
             lambda path: resample.write_audit_log(state.smote_audit, path))

    if state.embedding is not None:
        emit("embedding.csv",
             lambda path: write_embedding_csv(state.embedding,
                                              state.embedding_labels, path))

    if state.config.figures:
        emit("roc.png", lambda path: plots.plot_roc_curves(state.roc_curves, path))
        if state.embedding is not None:
            emit("embedding.png",
                 lambda path: plots.plot_embedding(state.embedding.Y,
                                                   state.embedding_labels, path))
    return written


def screen_transactions(model_path, transactions_csv, threshold: float = 0.5):
    """Score each transaction with a saved model; a score at or above the
    threshold is forwarded for review, anything below is approved.

    Returns (decisions, summary) where summary is a dict with
    'approved' and 'review' counts.
    """
    with open(model_path, "r", encoding="utf-8") as fh:
        model = gbdt.load_model(fh.read())

    import csv as _csv
    with open(transactions_csv, "r", encoding="utf-8", newline="") as fh:
        reader = _csv.reader(fh)
        header = [h.strip() for h in next(reader)]
        expected = set(model.feature_names)
        got = set(header) - {"Class"}          # an optional label column is ignored
        if got != expected:
            missing = sorted(expected - got)
            extra = sorted(got - expected)
            raise SchemaMismatch(
                f"transaction columns do not match model features; "
                f"missing={missing} extra={extra}")
        col_of = {name: header.index(name) for name in model.feature_names}
        rows = []
        for record in reader:
            if not record:
                continue
            rows.append([float(record[col_of[name]])
                         for name in model.feature_names])
    X = np.asarray(rows, dtype=np.float64)
    scores = model.predict_scores(X) if len(rows) else np.empty(0)

    decisions = [
        ScreeningDecision(index=i, score=float(s),
                          decision="review" if s >= threshold else "approve")
        for i, s in enumerate(scores)
    ]
    summary = {
        "approved": sum(1 for d in decisions if d.decision == "approve"),
        "review": sum(1 for d in decisions if d.decision == "review"),
    }
    return decisions, summary


def write_decisions_csv(decisions, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("index,score,decision\n")
        for d in decisions:
            fh.write(f"{d.index},{format(d.score, _FMT)},{d.decision}\n")

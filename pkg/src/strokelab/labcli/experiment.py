"""Experiment runner: prepare, split, resample, fit, evaluate, one row per configuration."""
from __future__ import annotations

import platform
from dataclasses import replace
from datetime import datetime, timezone
from functools import lru_cache
from pathlib import Path

import numpy as np

from .. import kernels
from ..errors import DataError
from ..ingest import Dataset, prepare, split, standardize, stratified_indices
from ..metrics import evaluate
from ..neural import LossSpec, TrainingHistory, forward, init_network, train, train_cluster_batches
from ..resample import ClusterUndersampleConfig, SmoteConfig, cluster_undersample, smote
from ..shallow import fit_classifier, fit_weighted_voting
from .config import NEURAL, ExperimentConfig
from .report import ExperimentReport

CAVEAT_LABEL_AUC = "auc is the ROC area of the thresholded labels; auc_score is the ranking AUC of the raw scores"
CAVEAT_XGB = "XGB is not implemented and is reported as out of scope"
CAVEAT_COMBINED_PROTOCOL = ("pcakmeans rows (combined protocol): the whole cleaned set is standardized and resampled "
                         "before the split, so test rows come from the resampled set and may duplicate training rows")
CAVEAT_LEAKAGE_FREE = ("pcakmeans rows (leakage-free protocol): split first, standardize and resample the "
                       "training part only, evaluate on untouched test rows")

NEURAL_NAMES = {
    "dnn": "DNN",
    "dnn_focal": "DNN + Focal Loss",
    "smote_dnn_focal": "SMOTE + DNN + Focal Loss",
    "pcakmeans_dnn_focal": "PCA-KMeans + DNN + Focal Loss",
}


@lru_cache(maxsize=8)
def _prepared(path: str, imputation: str, encoding: str) -> Dataset:
    if not Path(path).is_file():
        raise DataError(f"input dataset not found: {path!r}")
    return prepare(path, imputation, encoding)


def load_prepared(cfg: ExperimentConfig) -> Dataset:
    return _prepared(str(cfg.input), cfg.imputation, cfg.encoding)


def environment() -> dict:
    return {
        "python": platform.python_version(),
        "numpy": np.__version__,
        "kernel_backend": kernels.BACKEND,
    }


def _row(cfg, technique, classifier, seed, epochs=None, params=None):
    return {
        "technique": technique, "classifier": classifier, "seed": seed, "epochs": epochs,
        "imputation": cfg.imputation, "encoding": cfg.encoding,
        "params": params or {}, "status": "ok", "error": None,
        "accuracy": None, "precision": None, "recall": None, "f1": None, "auc": None,
        "tp": None, "fp": None, "tn": None, "fn": None, "auc_score": None,
    }


def _fill(row, y, scores, threshold):
    rep, score_auc = evaluate(y, scores, threshold)
    row.update(rep.to_dict())
    row["auc_score"] = score_auc
    return row


def _failed(row, exc):
    row["status"] = "failed"
    row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def _split_std(ds: Dataset, cfg, seed):
    tr, te = split(ds, cfg.test_fraction, seed)
    tr, (te,) = standardize(tr, [te])
    return tr, te


def _smote(ds: Dataset, cfg, seed):
    return smote(ds, SmoteConfig(k_neighbors=cfg.smote_k, seed=seed))


def _shallow_rows(cfg: ExperimentConfig, ds: Dataset, seed: int) -> list[dict]:
    rows = []
    specs = cfg.classifier_specs(seed)
    try:
        tr, te = _split_std(ds, cfg, seed)
        if cfg.technique in ("smote", "smote_voting"):
            tr = _smote(tr, cfg, seed)
    except Exception as exc:
        names = ["Weighted Voting"] if "voting" in cfg.technique else [s.name for s in specs]
        return [_failed(_row(cfg, cfg.technique, n, seed), exc) for n in names]
    if cfg.technique in ("voting", "smote_voting"):
        row = _row(cfg, cfg.technique, "Weighted Voting", seed,
                   params={"weighting": cfg.voting_weighting, "members": [s.name for s in specs]})
        try:
            model = fit_weighted_voting(specs, tr, cfg.voting_weighting, seed=seed)
            row["params"]["weights"] = model.weights.tolist()
            rows.append(_fill(row, te.y, model.score(te.X), cfg.threshold))
        except Exception as exc:
            rows.append(_failed(row, exc))
        return rows
    for spec in specs:
        row = _row(cfg, cfg.technique, spec.name, seed, params=dict(spec.params))
        try:
            model = fit_classifier(spec, tr)
            rows.append(_fill(row, te.y, model.score(te.X), cfg.threshold))
        except Exception as exc:
            rows.append(_failed(row, exc))
    return rows


def _cluster_data(cfg: ExperimentConfig, ds: Dataset, seed: int):
    """Cluster batches for training plus the evaluation set, per the chosen protocol."""
    cu = ClusterUndersampleConfig(cfg.n_components, cfg.n_clusters, tuple(cfg.ks_schedule), seed=seed)
    if cfg.pcakmeans_protocol == "leakage_free":
        tr, te = _split_std(ds, cfg, seed)
        res = cluster_undersample(tr, cu)
        return [b.dataset for b in res.batches], te
    full, _ = standardize(ds)
    res = cluster_undersample(full, cu)
    tr_idx, te_idx = stratified_indices(res.combined.y, cfg.test_fraction, seed)
    in_train = np.zeros(len(res.combined), dtype=bool)
    in_train[tr_idx] = True
    batches = [res.combined.subset(np.flatnonzero(in_train & (res.cluster_id == b.cluster_index)))
               for b in res.batches]
    return [b for b in batches if len(b)], res.combined.subset(te_idx)


def _neural_rows(cfg: ExperimentConfig, ds: Dataset, seed: int) -> tuple[list[dict], list[dict]]:
    """Rows at every requested epoch count of one training run, plus its history."""
    t = cfg.technique
    name = NEURAL_NAMES[t]
    marks = sorted(set(cfg.epochs))
    params_meta = {"hidden": list(cfg.hidden), "gamma": None if t == "dnn" else cfg.gamma,
                   "threshold": cfg.dnn_threshold}
    if t == "pcakmeans_dnn_focal":
        params_meta["protocol"] = cfg.pcakmeans_protocol
    rows = {e: _row(cfg, t, name, seed, e, dict(params_meta)) for e in marks}
    history = TrainingHistory()
    try:
        spec = LossSpec.ce() if t == "dnn" else LossSpec.focal(cfg.gamma)
        if t == "pcakmeans_dnn_focal":
            batches, te = _cluster_data(cfg, ds, seed)
        else:
            tr, te = _split_std(ds, cfg, seed)
            if t == "smote_dnn_focal":
                tr = _smote(tr, cfg, seed)
        net = init_network(te.n_features, tuple(cfg.hidden), seed)

        def checkpoint(epoch, params):
            if epoch in rows:
                _fill(rows[epoch], te.y, forward(params, te.X), cfg.dnn_threshold)

        common = dict(spec=spec, seed=seed, eval=te, momentum=cfg.momentum,
                      threshold=cfg.dnn_threshold, callback=checkpoint)
        if t == "pcakmeans_dnn_focal":
            _, history = train_cluster_batches(net, batches, marks[-1], step=cfg.cluster_step, **common)
        else:
            _, history = train(net, tr, marks[-1], batch_size=cfg.batch_size, step=cfg.step, **common)
    except Exception as exc:
        for r in rows.values():
            if r["f1"] is None:
                _failed(r, exc)
    hist = [{"technique": t, "seed": seed, **h} for h in history.rows()]
    return list(rows.values()), hist


def caveats_for(techniques, cfg: ExperimentConfig, sweep: bool = False) -> list[str]:
    out = [CAVEAT_LABEL_AUC]
    if sweep:
        out.append(CAVEAT_XGB)
    if "pcakmeans_dnn_focal" in techniques:
        out.append(CAVEAT_COMBINED_PROTOCOL if cfg.pcakmeans_protocol == "combined" else CAVEAT_LEAKAGE_FREE)
    return out


def _collect(cfg: ExperimentConfig, ds: Dataset):
    rows, hist = [], []
    for seed in cfg.seeds:
        if cfg.technique in NEURAL:
            r, h = _neural_rows(cfg, ds, seed)
            rows += r
            hist += h
        else:
            rows += _shallow_rows(cfg, ds, seed)
    return rows, hist


def _timestamp() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def run_experiment(cfg: ExperimentConfig, dataset: Dataset | None = None) -> ExperimentReport:
    """Run one technique over every seed (and classifier or epoch count)."""
    ds = dataset if dataset is not None else load_prepared(cfg)
    rows, hist = _collect(cfg, ds)
    return ExperimentReport(
        kind="run", config=cfg.to_dict(), rows=rows, histories=hist,
        caveats=caveats_for([cfg.technique], cfg), environment=environment(),
        generated_at=_timestamp(),
    )


SWEEP_TECHNIQUES = ("baseline", "smote", "voting", "smote_voting",
                    "dnn", "dnn_focal", "smote_dnn_focal", "pcakmeans_dnn_focal")


def run_sweep(cfg: ExperimentConfig, techniques=SWEEP_TECHNIQUES,
              dataset: Dataset | None = None) -> ExperimentReport:
    """Every technique in turn; a failing configuration is recorded and the sweep continues."""
    ds = dataset if dataset is not None else load_prepared(cfg)
    rows, hist = [], []
    for t in techniques:
        r, h = _collect(replace(cfg, technique=t), ds)
        rows += r
        hist += h
    config = cfg.to_dict()
    config["technique"] = list(techniques)
    return ExperimentReport(
        kind="sweep", config=config, rows=rows, histories=hist,
        caveats=caveats_for(techniques, cfg, sweep=True), environment=environment(),
        generated_at=_timestamp(),
    )

"""Acceptance criteria, one test group per criterion, tolerances pinned.

Criteria 1-8 and 10 measure the real stroke table. Point ``STROKE_CSV`` at
it (default: ``data/healthcare-dataset-stroke-data.csv`` in the repository).
Without the file those criteria fail with "dataset unavailable"; they are
never skipped. Criterion 9 is self-contained.

Run directly with ``python3 tests/test_acceptance.py``; the terminal summary
prints one PASS/FAIL line per criterion.
"""
import os
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from strokelab.ingest import Dataset, prepare, standardize, stratified_indices
from strokelab.labcli.config import ExperimentConfig, build_config
from strokelab.labcli.experiment import run_experiment
from strokelab.labcli.report import canonical_json
from strokelab.metrics import roc_auc, roc_auc_pairwise
from strokelab.neural import LossSpec, compute_loss, forward, gradients, init_network
from strokelab.profile import bottom_ranks, tree_importance, vif
from strokelab.resample import ClusterUndersampleConfig, SmoteConfig, cluster_undersample, kmeans_fit, pca_fit, smote

from conftest import note, toy_dataset

DEFAULT_CSV = Path(__file__).resolve().parents[1] / "data" / "healthcare-dataset-stroke-data.csv"
SEEDS = [7, 17, 42]
EPOCHS = [50, 100, 200]

# pinned tolerances
C1_F1_MAX, C1_AUC_BAND, C1_ACC_MIN, C1_SECONDS = 0.05, (0.45, 0.57), 0.89, 120.0
C2_F1_MIN = 0.15
C3_F1_BAND, C3_AUC_BAND = (0.20, 0.38), (0.60, 0.80)
C4_NOISE, C4_GAP = 0.03, 0.08
C5_SIZE_BAND, C5_IR_FACTOR = (1.6, 2.4), 1.8
C6_F1_MIN, C6_AUC_MIN, C6_FACTOR, C6_SECONDS = 0.60, 0.80, 1.8, 300.0
C7_CUMULATIVE = 0.90
C8_VIF_MAX = 10.0
C10_BOTTOM = 3
C9_FOCAL_TOL, C9_GRAD_RTOL, C9_SMOTE_TOL, C9_PCA_TOL, C9_VIF_TOL = 1e-12, 1e-4, 1e-9, 1e-8, 1e-6


def _stroke_csv():
    return Path(os.environ.get("STROKE_CSV", DEFAULT_CSV))


@pytest.fixture(scope="module")
def stroke_path():
    path = _stroke_csv()
    if not path.is_file():
        for cid in (1, 2, 3, 4, 5, 6, 7, 8, 10):
            note(cid, "dataset unavailable (set STROKE_CSV)")
        pytest.fail(f"dataset unavailable: {path} not found (set STROKE_CSV)")
    return path


def _config(path, technique, classifiers=None, **kw) -> ExperimentConfig:
    c = build_config(input=str(path), technique=technique, seeds=SEEDS, epochs=EPOCHS,
                     imputation="regression", encoding="onehot")
    if classifiers:
        c = replace(c, classifiers=classifiers)
    return replace(c, **kw) if kw else c


def _means(report, technique=None):
    out = {}
    for e in report.summary():
        if technique is None or e["technique"] == technique:
            assert e["failed"] == 0, f"{e['technique']}/{e['classifier']} failed on some seed"
            out[(e["classifier"], e["epochs"])] = e
    return out


@pytest.fixture(scope="module")
def smote_all(stroke_path):
    return _means(run_experiment(_config(stroke_path, "smote")))


@pytest.fixture(scope="module")
def baseline_all(stroke_path):
    return _means(run_experiment(_config(stroke_path, "baseline")))


# ------------------------------------------------------------ criterion 1

def test_c01_majority_collapse(stroke_path):
    t0 = time.perf_counter()
    rep = run_experiment(_config(stroke_path, "baseline", ["LR", "SGD", "Gaussian", "GBC"]))
    seconds = time.perf_counter() - t0
    means = _means(rep)
    bad = []
    for (name, _), e in means.items():
        note(1, f"{name} F1={e['f1']:.3f} AUC={e['auc']:.3f} acc={e['accuracy']:.3f}")
        if not (e["f1"] <= C1_F1_MAX and C1_AUC_BAND[0] <= e["auc"] <= C1_AUC_BAND[1]
                and e["accuracy"] >= C1_ACC_MIN):
            bad.append(name)
    note(1, f"runtime {seconds:.1f}s")
    assert not bad, f"outside the collapse band: {bad}"
    assert seconds < C1_SECONDS


# ------------------------------------------------------------ criterion 2

def test_c02_qda_resistance(baseline_all):
    f1 = baseline_all[("QDA", None)]["f1"]
    note(2, f"QDA F1={f1:.3f}")
    assert f1 >= C2_F1_MIN


# ------------------------------------------------------------ criterion 3

@pytest.mark.parametrize("name", ["LR", "SGD", "DTC", "QDA"])
def test_c03_smote_lift(name, baseline_all, smote_all):
    e, base = smote_all[(name, None)], baseline_all[(name, None)]
    note(3, f"{name} F1={e['f1']:.3f} (base {base['f1']:.3f}) AUC={e['auc']:.3f}")
    assert C3_F1_BAND[0] <= e["f1"] <= C3_F1_BAND[1]
    assert C3_AUC_BAND[0] <= e["auc"] <= C3_AUC_BAND[1]
    assert e["f1"] > base["f1"]


# ------------------------------------------------------------ criterion 4

def test_c04_focal_epoch_trend(stroke_path):
    ce = _means(run_experiment(_config(stroke_path, "dnn")))
    fl = _means(run_experiment(_config(stroke_path, "dnn_focal")))
    ce_f1 = [ce[("DNN", e)]["f1"] for e in EPOCHS]
    fl_f1 = [fl[("DNN + Focal Loss", e)]["f1"] for e in EPOCHS]
    note(4, f"CE F1 {[round(v, 3) for v in ce_f1]}, focal F1 {[round(v, 3) for v in fl_f1]}")
    assert all(b <= a + C4_NOISE for a, b in zip(ce_f1, ce_f1[1:])), "CE F1 rises beyond noise"
    assert all(b >= a - C4_NOISE for a, b in zip(fl_f1, fl_f1[1:])), "focal F1 falls beyond noise"
    assert fl_f1[-1] - ce_f1[-1] >= C4_GAP


# ------------------------------------------------------------ criterion 5

@pytest.mark.parametrize("seed", SEEDS)
def test_c05_cluster_arithmetic(stroke_path, seed):
    ds, _ = standardize(prepare(stroke_path, "regression", "onehot"))
    res = cluster_undersample(ds, ClusterUndersampleConfig(seed=seed))
    size = len(res.combined) / len(ds)
    ir = ds.imbalance_ratio() / res.combined.imbalance_ratio()
    note(5, f"seed {seed}: size x{size:.2f}, imbalance reduced x{ir:.2f}")
    assert C5_SIZE_BAND[0] <= size <= C5_SIZE_BAND[1]
    assert ir >= C5_IR_FACTOR


# ------------------------------------------------------------ criterion 6

def test_c06_pcakmeans_headline(stroke_path, smote_all):
    t0 = time.perf_counter()
    rep = run_experiment(_config(stroke_path, "pcakmeans_dnn_focal", pcakmeans_protocol="combined"))
    seconds = time.perf_counter() - t0
    e = _means(rep)[("PCA-KMeans + DNN + Focal Loss", 200)]
    best_smote = max(v["f1"] for (name, _), v in smote_all.items())
    note(6, f"F1={e['f1']:.3f} AUC={e['auc']:.3f} best SMOTE F1={best_smote:.3f} runtime {seconds:.1f}s")
    assert e["f1"] >= C6_F1_MIN
    assert e["auc"] >= C6_AUC_MIN
    assert e["f1"] >= C6_FACTOR * best_smote
    assert seconds < C6_SECONDS


# ------------------------------------------------------------ criterion 7

def test_c07_seven_components(stroke_path):
    ds, _ = standardize(prepare(stroke_path, "regression", "onehot"))
    cum = pca_fit(ds.X, ds.n_features).cumulative_ratio[6]
    note(7, f"7 components explain {cum:.3f}")
    assert cum >= C7_CUMULATIVE


# ------------------------------------------------------------ criterion 8

def test_c08_vif(stroke_path):
    lab = prepare(stroke_path, "regression", "label")
    oh = prepare(stroke_path, "regression", "onehot")
    v_lab = vif(lab, include_label=True)
    v_oh = vif(oh, include_label=True, groups=oh.groups)
    worst = max(list(v_lab.values()) + list(v_oh.values()))
    note(8, f"max VIF {worst:.2f}; age label {v_lab['age']:.2f} vs one-hot {v_oh['age']:.2f}")
    assert worst < C8_VIF_MAX
    assert v_lab["age"] < v_oh["age"]


# ------------------------------------------------------------ criterion 10

def test_c10_least_important_features(stroke_path):
    imp = tree_importance(prepare(stroke_path, "regression", "label"))
    ranks = bottom_ranks(imp)
    note(10, f"bottom ranks heart_disease={ranks['heart_disease']} ever_married={ranks['ever_married']}")
    assert ranks["heart_disease"] <= C10_BOTTOM
    assert ranks["ever_married"] <= C10_BOTTOM


# ------------------------------------------------------------ criterion 9

def test_c09_focal_gamma_zero_is_ce():
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(200):
        n = int(rng.integers(1, 100))
        p = rng.uniform(1e-9, 1 - 1e-9, n)
        y = rng.integers(0, 2, n)
        a, _ = compute_loss(p, y, LossSpec.focal(0.0))
        b, _ = compute_loss(p, y, LossSpec.ce())
        worst = max(worst, abs(a - b))
    note(9, f"focal(0)-CE max {worst:.1e}")
    assert worst <= C9_FOCAL_TOL


@pytest.mark.parametrize("spec", [LossSpec.ce(), LossSpec.focal(2.0)], ids=["ce", "focal"])
def test_c09_gradient_check(spec):
    rng = np.random.default_rng(1)
    X = rng.normal(size=(12, 4))
    y = rng.integers(0, 2, 12)
    params = init_network(4, (6, 5), seed=2)
    dW, db, _ = gradients(params, X, y, spec)
    worst = 0.0
    for g_list, tensors in ((dW, params.weights), (db, params.biases)):
        for g, T in zip(g_list, tensors):
            fd = np.zeros_like(T)
            for idx in np.ndindex(T.shape):
                old = T[idx]
                T[idx] = old + 1e-6
                up = compute_loss(forward(params, X), y, spec)[0]
                T[idx] = old - 1e-6
                down = compute_loss(forward(params, X), y, spec)[0]
                T[idx] = old
                fd[idx] = (up - down) / 2e-6
            worst = max(worst, np.linalg.norm(g - fd) / max(np.linalg.norm(g), np.linalg.norm(fd), 1e-12))
    note(9, f"{spec.kind} gradient rel err {worst:.1e}")
    assert worst <= C9_GRAD_RTOL


def test_c09_auc_pairwise_oracle():
    rng = np.random.default_rng(2)
    for _ in range(200):
        n = int(rng.integers(2, 101))
        y = rng.integers(0, 2, n)
        y[:2] = [0, 1]
        s = rng.integers(0, 10, n) / 3.0
        assert roc_auc(y, s) == roc_auc_pairwise(y, s)
    note(9, "AUC = pairwise on 200 instances")


def test_c09_smote_segments():
    ds = toy_dataset(n=150, d=3, pos=0.15, seed=5)
    out = smote(ds, SmoteConfig(k_neighbors=5, seed=5))
    Xm = ds.X[ds.y == 1]
    worst = 0.0
    for p in out.X[len(ds):]:
        best = np.inf
        for i in range(len(Xm)):
            for j in range(len(Xm)):
                if i == j:
                    continue
                d = Xm[j] - Xm[i]
                lam = np.clip((p - Xm[i]) @ d / (d @ d), 0.0, 1.0)
                best = min(best, np.linalg.norm(Xm[i] + lam * d - p))
        worst = max(worst, best)
    note(9, f"SMOTE segment distance max {worst:.1e}")
    assert worst <= C9_SMOTE_TOL


def test_c09_pca_against_eigh():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(150, 8)) @ rng.normal(size=(8, 8))
    m = pca_fit(X, 8)
    ortho = np.abs(m.components @ m.components.T - np.eye(8)).max()
    evals = np.linalg.eigvalsh(np.cov(X, rowvar=False))[::-1]
    ev_err = np.abs(m.explained_variance - evals).max() / evals[0]
    note(9, f"PCA orthonormality {ortho:.1e}, variance err {ev_err:.1e}")
    assert ortho <= C9_PCA_TOL
    assert ev_err <= C9_PCA_TOL


def test_c09_vif_ols_oracle():
    rng = np.random.default_rng(4)
    X = rng.normal(size=(200, 5)) @ rng.normal(size=(5, 5))
    ds = Dataset(X, (X[:, 0] > 0).astype(int), tuple("abcde"))
    got = vif(ds)
    worst = 0.0
    for j, name in enumerate("abcde"):
        A = np.column_stack([np.ones(200), np.delete(X, j, axis=1)])
        beta, *_ = np.linalg.lstsq(A, X[:, j], rcond=None)
        r = X[:, j] - A @ beta
        want = 1.0 / (r @ r / ((X[:, j] - X[:, j].mean()) ** 2).sum())
        worst = max(worst, abs(got[name] - want) / want)
    note(9, f"VIF rel err {worst:.1e}")
    assert worst <= C9_VIF_TOL


def test_c09_kmeans_inertia_monotone():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(300, 4))
    for seed in range(10):
        h = np.array(kmeans_fit(X, 6, seed=seed).inertia_history)
        assert np.all(np.diff(h) <= 0.0)
    note(9, "k-means inertia non-increasing")


def test_c09_stratified_counts():
    rng = np.random.default_rng(6)
    for _ in range(200):
        n_pos, n_neg = int(rng.integers(2, 80)), int(rng.integers(2, 500))
        y = rng.permutation(np.r_[np.ones(n_pos), np.zeros(n_neg)]).astype(int)
        frac = float(rng.uniform(0.05, 0.5))
        _, te = stratified_indices(y, frac, int(rng.integers(1_000_000)))
        assert abs((y[te] == 1).sum() - frac * n_pos) <= 1
        assert abs((y[te] == 0).sum() - frac * n_neg) <= 1
    note(9, "stratified counts within 1")


def test_c09_byte_identical_reports(small_csv):
    c = build_config(input=str(small_csv), technique="smote", seeds=[7], classifiers=["LR", "DTC"])
    a, b = run_experiment(c), run_experiment(c)
    assert canonical_json(a) == canonical_json(b)
    note(9, "fixed-seed reports identical")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from strokelab.errors import DataError
from strokelab.ingest import Dataset, standardize
from strokelab.resample import (
    ClusterUndersampleConfig, SmoteConfig, cluster_undersample, elbow_point, elbow_scan,
    export_batches, kmeans_fit, load_batches, pca_fit, pca_inverse, pca_transform, read_elbow, smote,
    write_elbow,
)

from conftest import toy_dataset


# ------------------------------------------------------------------ SMOTE

def _on_some_segment(p, Xm, nbr_sets, tol=1e-9):
    for a_i, nbrs in enumerate(nbr_sets):
        a = Xm[a_i]
        for b_i in nbrs:
            d = Xm[b_i] - a
            dd = d @ d
            if dd == 0:
                if np.linalg.norm(p - a) <= tol:
                    return True
                continue
            lam = (p - a) @ d / dd
            if -tol <= lam <= 1 + tol and np.linalg.norm(a + lam * d - p) <= tol:
                return True
    return False


def _brute_knn(Xm, k):
    D = ((Xm[:, None, :] - Xm[None, :, :]) ** 2).sum(-1)
    np.fill_diagonal(D, np.inf)
    return [np.argsort(row, kind="stable")[:k] for row in D]


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), k=st.integers(1, 5))
def test_smote_points_lie_on_minority_segments(seed, k):
    ds = toy_dataset(n=120, d=3, pos=0.15, seed=seed)
    if ds.class_counts()[1] <= k:
        return
    out = smote(ds, SmoteConfig(k_neighbors=k, seed=seed))
    Xm = ds.X[ds.y == 1]
    nbr_sets = _brute_knn(Xm, k)
    synth = out.X[len(ds):]
    assert len(synth) > 0
    for p in synth:
        assert _on_some_segment(p, Xm, nbr_sets)


def test_smote_balances_and_preserves_originals(toy):
    out = smote(toy, SmoteConfig(seed=1))
    neg, pos = out.class_counts()
    assert neg == pos
    np.testing.assert_array_equal(out.X[:len(toy)], toy.X)
    assert (out.row_ids[len(toy):] == -1).all()
    assert (out.y[len(toy):] == 1).all()


def test_smote_target_ratio(toy):
    neg, pos = toy.class_counts()
    out = smote(toy, SmoteConfig(target_ratio=0.5, seed=0))
    assert out.class_counts() == (neg, round(0.5 * neg))


def test_smote_pinned_lambdas(toy):
    Xm = toy.X[toy.y == 1]
    at_base = smote(toy, SmoteConfig(seed=3), lambdas=0.0).X[len(toy):]
    assert all(np.any(np.all(Xm == p, axis=1)) for p in at_base)
    at_nbr = smote(toy, SmoteConfig(seed=3), lambdas=1.0).X[len(toy):]
    assert all(np.any(np.all(np.isclose(Xm, p, atol=1e-12), axis=1)) for p in at_nbr)


def test_smote_is_seeded(toy):
    a = smote(toy, SmoteConfig(seed=5)).X
    b = smote(toy, SmoteConfig(seed=5)).X
    c = smote(toy, SmoteConfig(seed=6)).X
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_smote_needs_enough_minority():
    ds = Dataset(np.arange(20.0).reshape(10, 2), [1, 1, 1, 0, 0, 0, 0, 0, 0, 0], ("a", "b"))
    with pytest.raises(DataError, match="k_neighbors"):
        smote(ds, SmoteConfig(k_neighbors=5))


def test_smote_noop_when_balanced():
    ds = toy_dataset(n=40, pos=0.5, seed=2)
    ds = ds.subset(np.r_[np.flatnonzero(ds.y == 1)[:10], np.flatnonzero(ds.y == 0)[:10]])
    assert smote(ds) is ds


# -------------------------------------------------------------------- PCA

@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(12, 80), d=st.integers(2, 9))
def test_pca_matches_brute_force(seed, n, d):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, d)) @ rng.normal(size=(d, d))
    m = pca_fit(X, d)
    np.testing.assert_allclose(m.components @ m.components.T, np.eye(d), atol=1e-8)
    # oracle: singular values of the centred matrix
    s = np.linalg.svd(X - X.mean(axis=0), compute_uv=False)
    np.testing.assert_allclose(m.explained_variance, s ** 2 / (n - 1), atol=1e-8 * max(1, s[0] ** 2))
    np.testing.assert_allclose(m.explained_variance_ratio.sum(), 1.0, atol=1e-8)
    np.testing.assert_allclose(pca_inverse(m, pca_transform(m, X)), X, atol=1e-8 * max(1, np.abs(X).max()))


def test_pca_sign_convention_and_truncation():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(100, 5)) * [5, 3, 2, 1, 0.5]
    m = pca_fit(X, 3)
    assert m.components.shape == (3, 5)
    for c in m.components:
        assert c[np.argmax(np.abs(c))] > 0
    assert np.all(np.diff(m.explained_variance) <= 0)
    assert m.cumulative_ratio[-1] < 1.0


def test_pca_rejects_too_many_components():
    with pytest.raises(DataError):
        pca_fit(np.zeros((10, 3)) + np.arange(3), 4)


# ---------------------------------------------------------------- k-means

@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), k=st.integers(1, 6))
def test_kmeans_inertia_monotone_and_consistent(seed, k):
    rng = np.random.default_rng(seed)
    X = np.vstack([rng.normal(c, 1.0, size=(30, 2)) for c in ((0, 0), (6, 0), (0, 6))])
    m = kmeans_fit(X, k, seed=seed)
    hist = np.array(m.inertia_history)
    assert np.all(np.diff(hist) <= 1e-9 * hist[0])
    D = ((X[:, None, :] - m.centroids[None]) ** 2).sum(-1)
    np.testing.assert_array_equal(m.assignments, D.argmin(axis=1))
    assert m.inertia == pytest.approx(D.min(axis=1).sum(), rel=1e-10)
    assert len(np.unique(m.assignments)) == k


def test_kmeans_recovers_separated_blobs():
    rng = np.random.default_rng(1)
    centers = np.array([(0, 0), (10, 0), (0, 10)])
    X = np.vstack([rng.normal(c, 0.3, size=(40, 2)) for c in centers])
    m = kmeans_fit(X, 3, seed=0)
    for block in range(3):
        assert len(np.unique(m.assignments[block * 40:(block + 1) * 40])) == 1


def test_kmeans_rejects_k_above_n():
    with pytest.raises(DataError):
        kmeans_fit(np.zeros((3, 2)), 4)


def test_elbow_curve_monotone_and_kink():
    rng = np.random.default_rng(2)
    X = np.vstack([rng.normal(c, 0.5, size=(50, 2)) for c in ((0, 0), (8, 0), (0, 8), (8, 8))])
    curve = elbow_scan(X, range(1, 9), seed=0)
    vals = [v for _, v in curve]
    assert all(b <= a for a, b in zip(vals, vals[1:]))
    assert elbow_point(curve) == 4


def test_elbow_csv_roundtrip(tmp_path):
    curve = [(1, 10.0), (2, 4.5), (3, 3.25)]
    assert read_elbow(write_elbow(curve, tmp_path / "e.csv")) == curve


# ------------------------------------------------------- cluster undersampling

@pytest.fixture(scope="module")
def cu_data(onehot_ds):
    std, _ = standardize(onehot_ds)
    cfg = ClusterUndersampleConfig(seed=0)
    return std, cfg, cluster_undersample(std, cfg)


def test_cluster_batches_structure(cu_data):
    ds, cfg, res = cu_data
    batches, combined = res
    m = ds.class_counts()[1]
    sizes = np.bincount(res.kmeans.assignments, minlength=cfg.n_clusters)
    expect_ks = dict(zip(np.argsort(sizes, kind="stable"), cfg.ks_schedule))
    Z = res.pca.components @ (ds.X - res.pca.mean).T
    Z = Z.T
    minority = np.flatnonzero(ds.y == 1)
    for b in batches:
        assert b.k_s == expect_ks[b.cluster_index]
        assert len(b.dataset) == m + m * b.k_s
        np.testing.assert_array_equal(b.provenance[:m], minority)
        chosen = b.provenance[m:]
        assert (ds.y[chosen] == 0).all()
        assert (res.kmeans.assignments[chosen] == b.cluster_index).all()
        # brute-force nearest neighbours for a few minority rows
        pool = np.flatnonzero((ds.y == 0) & (res.kmeans.assignments == b.cluster_index))
        for j in (0, m // 2, m - 1):
            d = ((Z[pool] - Z[minority[j]]) ** 2).sum(axis=1)
            want = np.sort(d)[:b.k_s]
            got = np.sort(((Z[chosen[j * b.k_s:(j + 1) * b.k_s]] - Z[minority[j]]) ** 2).sum(axis=1))
            np.testing.assert_allclose(got, want, rtol=1e-10)
    assert len(combined) == m * (sum(cfg.ks_schedule) + cfg.n_clusters)
    np.testing.assert_array_equal(np.bincount(res.cluster_id), [len(b.dataset) for b in batches])


def test_cluster_undersample_reduces_imbalance(cu_data):
    ds, _, res = cu_data
    assert res.combined.imbalance_ratio() < ds.imbalance_ratio()
    assert res.combined.imbalance_ratio() == pytest.approx(sum(b.k_s for b in res.batches) / 5)


def test_cluster_undersample_dedup_shrinks(cu_data):
    ds, cfg, res = cu_data
    dd = cluster_undersample(ds, ClusterUndersampleConfig(seed=0, dedup=True))
    assert len(dd.combined) < len(res.combined)
    for b in dd.batches:
        chosen = b.provenance[ds.class_counts()[1]:]
        assert len(np.unique(chosen)) == len(chosen)


def test_cluster_config_validation():
    with pytest.raises(DataError):
        ClusterUndersampleConfig(ks_schedule=(3, 5))
    with pytest.raises(DataError):
        ClusterUndersampleConfig(ks_schedule=(3, 5, 7, 9, 10))
    assert ClusterUndersampleConfig.sweep(7).ks_schedule == (7,) * 5


def test_batches_export_roundtrip(tmp_path, cu_data):
    _, _, res = cu_data
    manifest = export_batches(res, tmp_path / "b")
    back = load_batches(manifest)
    assert [b.k_s for b in back] == [b.k_s for b in res.batches]
    for a, b in zip(back, res.batches):
        np.testing.assert_array_equal(a.dataset.X, b.dataset.X)
        np.testing.assert_array_equal(a.provenance, b.provenance)

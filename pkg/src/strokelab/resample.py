"""Data-level imbalance handling: SMOTE, PCA, k-means and cluster undersampling."""
from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .errors import DataError
from .ingest import Dataset, export_dataset, load_dataset


# ------------------------------------------------------------------ SMOTE

@dataclass
class SmoteConfig:
    k_neighbors: int = 5
    target_ratio: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.k_neighbors < 1:
            raise DataError("k_neighbors must be >= 1")
        if not 0 < self.target_ratio <= 1:
            raise DataError("target_ratio must be in (0, 1]")


def smote(ds: Dataset, cfg: SmoteConfig | None = None, lambdas=None) -> Dataset:
    """Append synthetic minority rows until minority/majority reaches ``target_ratio``.

    Each synthetic row is ``x + lam * (nb - x)`` for a random minority row
    ``x``, one of its ``k`` nearest minority neighbours ``nb`` and
    ``lam ~ U[0, 1)``. ``lambdas`` overrides the interpolation weights
    (tests use it to pin them). Synthetic rows get ``row_ids == -1``.
    """
    cfg = cfg or SmoteConfig()
    neg, pos = ds.class_counts()
    if neg == 0 or pos == 0:
        raise DataError("SMOTE needs both classes")
    minority = 1 if pos <= neg else 0
    n_min, n_maj = min(neg, pos), max(neg, pos)
    if n_min <= cfg.k_neighbors:
        raise DataError(f"minority class has {n_min} rows; need more than k_neighbors={cfg.k_neighbors}")
    n_new = int(round(cfg.target_ratio * n_maj)) - n_min
    if n_new <= 0:
        return ds
    rng = np.random.default_rng(cfg.seed)
    Xm = ds.X[ds.y == minority]
    nbrs, _ = kernels.knn_search(Xm, Xm, cfg.k_neighbors, 2.0, True)
    base = rng.integers(0, n_min, size=n_new)
    pick = nbrs[base, rng.integers(0, cfg.k_neighbors, size=n_new)]
    lam = rng.random(n_new) if lambdas is None else np.broadcast_to(np.asarray(lambdas, float), (n_new,))
    synth = Xm[base] + lam[:, None] * (Xm[pick] - Xm[base])
    X = np.vstack([ds.X, synth])
    y = np.concatenate([ds.y, np.full(n_new, minority, dtype=np.int64)])
    row_ids = np.concatenate([ds.row_ids, np.full(n_new, -1, dtype=np.int64)])
    return ds.with_rows(X, y, row_ids)


# -------------------------------------------------------------------- PCA

@dataclass
class PcaModel:
    components: np.ndarray          # (n_components, n_features), orthonormal rows
    explained_variance: np.ndarray
    explained_variance_ratio: np.ndarray
    mean: np.ndarray
    total_variance: float

    @property
    def n_components(self) -> int:
        return self.components.shape[0]

    @property
    def cumulative_ratio(self) -> np.ndarray:
        return np.cumsum(self.explained_variance_ratio)


def pca_fit(X, n_components: int) -> PcaModel:
    """Top eigenvectors of the sample covariance.

    Each component is signed so its largest-magnitude entry is positive.
    """
    X = np.asarray(X, dtype=np.float64)
    n, d = X.shape
    if n < 2:
        raise DataError("PCA needs at least two rows")
    if not 1 <= n_components <= min(n - 1, d):
        raise DataError(f"n_components must be in [1, {min(n - 1, d)}]")
    mean = X.mean(axis=0)
    Xc = X - mean
    cov = Xc.T @ Xc / (n - 1)
    vals, vecs = np.linalg.eigh(cov)
    order = np.argsort(vals)[::-1]
    vals = np.clip(vals[order], 0.0, None)
    vecs = vecs[:, order].T
    rows = np.arange(d)
    lead = np.abs(vecs).argmax(axis=1)
    vecs *= np.sign(vecs[rows, lead])[:, None]
    total = float(np.trace(cov))
    ratio = vals / total if total > 0 else np.zeros_like(vals)
    return PcaModel(vecs[:n_components].copy(), vals[:n_components].copy(),
                    ratio[:n_components].copy(), mean, total)


def pca_transform(model: PcaModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.mean.shape[0]:
        raise DataError(f"expected {model.mean.shape[0]} columns")
    return (X - model.mean) @ model.components.T


def pca_inverse(model: PcaModel, Z) -> np.ndarray:
    return np.asarray(Z) @ model.components + model.mean


# ---------------------------------------------------------------- k-means

@dataclass
class KmeansModel:
    centroids: np.ndarray
    assignments: np.ndarray
    inertia: float
    iterations: int
    inertia_history: list[float] = field(default_factory=list)


def _sq_dist(X, C):
    d = (X * X).sum(1)[:, None] - 2.0 * X @ C.T + (C * C).sum(1)[None, :]
    return np.maximum(d, 0.0)


def _assign(X, C):
    d = _sq_dist(X, C)
    a = d.argmin(axis=1)
    return a, float(d[np.arange(len(X)), a].sum())


def _kmeanspp(X, k, rng):
    n = len(X)
    chosen = [int(rng.integers(n))]
    closest = _sq_dist(X, X[chosen])[:, 0]
    for _ in range(1, k):
        total = closest.sum()
        if total > 0:
            nxt = int(rng.choice(n, p=closest / total))
        else:
            free = np.setdiff1d(np.arange(n), chosen)
            nxt = int(rng.choice(free))
        chosen.append(nxt)
        closest = np.minimum(closest, _sq_dist(X, X[[nxt]])[:, 0])
    return X[chosen].copy()


def _lloyd(X, C, max_iter, tol):
    history = []
    a, inertia = _assign(X, C)
    history.append(inertia)
    it = 0
    for it in range(1, max_iter + 1):
        new = np.empty_like(C)
        for j in range(len(C)):
            members = X[a == j]
            new[j] = members.mean(axis=0) if len(members) else C[j]
        empty = [j for j in range(len(C)) if not np.any(a == j)]
        if empty:
            d = _sq_dist(X, new).min(axis=1)
            for j in empty:
                far = int(d.argmax())
                new[j] = X[far]
                d[far] = 0.0
        shift = float(np.sqrt(((new - C) ** 2).sum()))
        C = new
        a, inertia = _assign(X, C)
        history.append(inertia)
        if shift < tol:
            break
    return C, a, inertia, it, history


def kmeans_fit(X, k: int, seed: int = 0, max_iter: int = 300, tol: float = 1e-6,
               init: np.ndarray | None = None) -> KmeansModel:
    """Lloyd iterations from a seeded k-means++ start (or from ``init``).

    Empty clusters are re-seeded at the point farthest from its centroid.
    ``inertia_history`` holds the inertia after every assignment step.
    """
    X = np.asarray(X, dtype=np.float64)
    if k <= 0:
        raise DataError("k must be positive")
    if k > len(X):
        raise DataError(f"k={k} exceeds the number of rows ({len(X)})")
    rng = np.random.default_rng(seed)
    C = _kmeanspp(X, k, rng) if init is None else np.array(init, dtype=np.float64)
    C, a, inertia, it, hist = _lloyd(X, C, max_iter, tol)
    return KmeansModel(C, a, inertia, it, hist)


def elbow_scan(X, k_range, seed: int = 0, n_init: int = 4) -> list[tuple[int, float]]:
    """Best-of-restarts inertia for each k.

    Each k also tries a warm start from the best smaller-k solution plus its
    worst-fit point, so the curve cannot increase with k.
    """
    X = np.asarray(X, dtype=np.float64)
    ks = sorted(set(int(k) for k in k_range))
    if not ks:
        raise DataError("k_range is empty")
    if ks[-1] > len(X):
        raise DataError("largest k exceeds the number of rows")
    curve, prev = [], None
    for k in ks:
        runs = [kmeans_fit(X, k, seed=seed + 7919 * r) for r in range(n_init)]
        if prev is not None and len(prev.centroids) < k:
            C = prev.centroids
            d = _sq_dist(X, C).min(axis=1)
            extra = []
            for _ in range(k - len(C)):
                far = int(d.argmax())
                extra.append(X[far])
                d = np.minimum(d, _sq_dist(X, X[[far]])[:, 0])
            runs.append(kmeans_fit(X, k, init=np.vstack([C] + extra)))
        best = min(runs, key=lambda m: m.inertia)
        curve.append((k, best.inertia))
        prev = best
    return curve


def elbow_point(curve) -> int:
    """k at maximum distance below the chord joining the curve's endpoints."""
    if len(curve) < 3:
        return curve[0][0]
    k = np.array([c[0] for c in curve], dtype=float)
    v = np.array([c[1] for c in curve], dtype=float)
    kn = (k - k[0]) / (k[-1] - k[0])
    span = v[0] - v[-1]
    vn = (v - v[-1]) / span if span > 0 else np.zeros_like(v)
    gap = (1.0 - kn) - vn
    return int(k[int(np.argmax(gap))])


# ----------------------------------------------------- cluster undersampling

@dataclass
class ClusterUndersampleConfig:
    n_components: int = 7
    n_clusters: int = 5
    ks_schedule: tuple[int, ...] = (3, 5, 7, 9, 11)
    seed: int = 0
    dedup: bool = False

    def __post_init__(self):
        self.ks_schedule = tuple(int(k) for k in self.ks_schedule)
        if len(self.ks_schedule) != self.n_clusters:
            raise DataError("ks_schedule needs one entry per cluster")
        if any(k < 1 or k % 2 == 0 for k in self.ks_schedule):
            raise DataError("every k_s must be a positive odd integer")

    @classmethod
    def sweep(cls, k: int, **kw) -> "ClusterUndersampleConfig":
        """Same k_s in every cluster (the swept-hyperparameter reading)."""
        n = kw.pop("n_clusters", 5)
        return cls(n_clusters=n, ks_schedule=(k,) * n, **kw)


@dataclass
class ClusterBatch:
    cluster_index: int
    k_s: int
    dataset: Dataset
    provenance: np.ndarray     # row positions in the source dataset


@dataclass
class ClusterUndersampleResult:
    batches: list[ClusterBatch]
    combined: Dataset
    pca: PcaModel
    kmeans: KmeansModel
    cluster_id: np.ndarray     # batch index of every combined row

    def __iter__(self):
        return iter((self.batches, self.combined))


def cluster_undersample(ds: Dataset, cfg: ClusterUndersampleConfig | None = None) -> ClusterUndersampleResult:
    """PCA → k-means → per-cluster nearest-majority selection.

    Batch ``i`` holds every minority row plus, for each minority row, its
    ``k_s`` nearest majority members of cluster ``i`` (distances in PCA
    space). ``k_s`` comes from ``ks_schedule`` matched to clusters sorted by
    ascending size. Unless ``dedup`` is set a majority row chosen by several
    minority rows appears once per choice. Unpacks as ``(batches, combined)``.
    """
    cfg = cfg or ClusterUndersampleConfig()
    neg, pos = ds.class_counts()
    if neg == 0 or pos == 0:
        raise DataError("cluster undersampling needs both classes")
    minority = 1 if pos <= neg else 0
    pca = pca_fit(ds.X, cfg.n_components)
    Z = pca_transform(pca, ds.X)
    km = kmeans_fit(Z, cfg.n_clusters, seed=cfg.seed)
    sizes = np.bincount(km.assignments, minlength=cfg.n_clusters)
    rank = np.empty(cfg.n_clusters, dtype=int)
    rank[np.argsort(sizes, kind="stable")] = np.arange(cfg.n_clusters)
    min_idx = np.flatnonzero(ds.y == minority)
    batches = []
    for c in range(cfg.n_clusters):
        k_s = cfg.ks_schedule[rank[c]]
        maj = np.flatnonzero((ds.y != minority) & (km.assignments == c))
        if len(maj) == 0:
            warnings.warn(f"cluster {c} has no majority rows; batch holds minority only",
                          RuntimeWarning, stacklevel=2)
            chosen = np.empty(0, dtype=np.int64)
        else:
            nbrs, _ = kernels.knn_search(Z[min_idx], Z[maj], min(k_s, len(maj)), 2.0, False)
            chosen = maj[nbrs.ravel()]
            if cfg.dedup:
                _, first = np.unique(chosen, return_index=True)
                chosen = chosen[np.sort(first)]
        prov = np.concatenate([min_idx, chosen])
        batches.append(ClusterBatch(c, k_s, ds.subset(prov), prov))
    prov_all = np.concatenate([b.provenance for b in batches])
    cluster_id = np.concatenate([np.full(len(b.provenance), b.cluster_index) for b in batches])
    combined = ds.subset(prov_all)
    return ClusterUndersampleResult(batches, combined, pca, km, cluster_id)


# ----------------------------------------------------------------- files

def write_elbow(curve, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "inertia"])
        for k, inertia in curve:
            w.writerow([int(k), repr(float(inertia))])
    return path


def read_elbow(path) -> list[tuple[int, float]]:
    with Path(path).open(newline="") as fh:
        return [(int(r["k"]), float(r["inertia"])) for r in csv.DictReader(fh)]


def export_batches(result: ClusterUndersampleResult, out_dir, stem: str = "batch") -> Path:
    """One dataset CSV per batch plus a JSON manifest; returns the manifest path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for b in result.batches:
        csv_path, meta_path = export_dataset(b.dataset, out_dir / f"{stem}_{b.cluster_index}.csv")
        neg, pos = b.dataset.class_counts()
        entries.append({
            "cluster_index": b.cluster_index, "k_s": b.k_s, "rows": len(b.dataset),
            "negatives": neg, "positives": pos,
            "csv": csv_path.name, "sidecar": meta_path.name,
            "provenance": b.provenance.tolist(),
        })
    manifest = {
        "format": "strokelab.batches/1",
        "n_components": result.pca.n_components,
        "explained_variance_ratio": result.pca.explained_variance_ratio.tolist(),
        "centroids": result.kmeans.centroids.tolist(),
        "inertia": result.kmeans.inertia,
        "combined_rows": len(result.combined),
        "batches": entries,
    }
    path = out_dir / f"{stem}_manifest.json"
    path.write_text(json.dumps(manifest, indent=2))
    return path


def load_batches(manifest_path) -> list[ClusterBatch]:
    manifest_path = Path(manifest_path)
    meta = json.loads(manifest_path.read_text())
    if meta.get("format") != "strokelab.batches/1":
        raise DataError(f"unsupported batch manifest format {meta.get('format')!r}")
    out = []
    for e in meta["batches"]:
        ds = load_dataset(manifest_path.parent / e["csv"], manifest_path.parent / e["sidecar"])
        out.append(ClusterBatch(e["cluster_index"], e["k_s"], ds, np.asarray(e["provenance"], dtype=np.int64)))
    return out

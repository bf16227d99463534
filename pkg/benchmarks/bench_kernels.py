"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each row reports the best wall time per backend and the speedup. The last
rows time whole model fits and scoring with ``kernels._impl`` swapped.
"""
import argparse
import time

import numpy as np

from strokelab import kernels
from strokelab.ingest import Dataset
from strokelab.shallow import fit_classifier, predict_scores
from strokelab.shallow.specs import ClassifierSpec


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def _cases(rng):
    n, d = 5000, 20
    x = np.sort(rng.normal(size=n))
    y = (rng.random(n) < 0.05).astype(float)
    w = np.ones(n)
    r = rng.normal(size=n)
    Q, R = rng.normal(size=(500, d)), rng.normal(size=(4000, d))
    X = rng.normal(size=(n, d))
    y_pm = np.where(rng.random(n) < 0.5, 1.0, -1.0)
    order = rng.permutation(n)
    return {
        "split gini n=5000": lambda: kernels.best_split_classification(x, y, w, kernels.GINI),
        "split entropy n=5000": lambda: kernels.best_split_classification(x, y, w, kernels.ENTROPY),
        "split regression n=5000": lambda: kernels.best_split_regression(x, r),
        "knn k=5 500x4000 d=20": lambda: kernels.knn_search(Q, R, 5),
        "sgd hinge epoch n=5000 d=20": lambda: kernels.sgd_hinge_epoch(
            X, y_pm, np.zeros(d), 0.0, order, 1e-4, 1e-2, 0.0),
    }


def _model_cases(rng):
    n, d = 2000, 10
    y = (rng.random(n) < 0.1).astype(np.int64)
    ds = Dataset(rng.normal(size=(n, d)) + y[:, None], y, tuple(f"f{i}" for i in range(d)))
    return {
        f"fit+score {kind} n={n}": (
            lambda kind=kind: predict_scores(fit_classifier(ClassifierSpec(kind, seed=0), ds), ds.X))
        for kind in ("tree", "gbc", "sgd", "knn")
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if kernels.compiled_backend is None:
        print("compiled kernels unavailable; only the numpy fallback can be timed")
    backends = {"python": kernels.python_backend}
    if kernels.compiled_backend is not None:
        backends["cython"] = kernels.compiled_backend
    rng = np.random.default_rng(0)
    cases = {**_cases(rng), **_model_cases(rng)}
    print(f"{'case':34s} " + " ".join(f"{b:>10s}" for b in backends) + "   speedup")
    saved = kernels._impl
    try:
        for label, fn in cases.items():
            row = {}
            for name, impl in backends.items():
                kernels._impl = impl
                row[name] = _best(fn, args.repeat)
            cells = " ".join(f"{row[b] * 1e3:8.2f}ms" for b in backends)
            speed = f"{row['python'] / row['cython']:8.1f}x" if "cython" in row else "       -"
            print(f"{label:34s} {cells} {speed}")
    finally:
        kernels._impl = saved


if __name__ == "__main__":
    main()

"""Hot loops, compiled when available.

Set ``STROKELAB_PURE_PYTHON=1`` to force the numpy fallback (used by the
parity tests and the benchmark).
"""
import os

import numpy as np

from . import _kernels_py as python_backend

compiled_backend = None
if os.environ.get("STROKELAB_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as compiled_backend
    except ImportError:
        compiled_backend = None

_impl = compiled_backend if compiled_backend is not None else python_backend
BACKEND = "cython" if compiled_backend is not None else "python"


def _f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def best_split_classification(x, y, w, criterion, min_leaf=1):
    """Best threshold of one presorted feature: ``(child_impurity, threshold)``."""
    return _impl.best_split_classification(_f64(x), _f64(y), _f64(w), int(criterion), int(min_leaf))


def best_split_regression(x, r, min_leaf=1):
    """Best squared-error threshold of one presorted feature: ``(child_sse, threshold)``."""
    return _impl.best_split_regression(_f64(x), _f64(r), int(min_leaf))


def knn_search(Q, R, k, p=2.0, skip_self=False):
    """Indices and distances of the ``k`` nearest rows of ``R`` per row of ``Q``."""
    return _impl.knn_search(_f64(Q), _f64(R), int(k), float(p), bool(skip_self))


def sgd_hinge_epoch(X, y_pm, w, b, order, alpha, step, t0):
    """One hinge-loss SGD epoch; ``w`` (float64, contiguous) is updated in place."""
    return _impl.sgd_hinge_epoch(
        _f64(X), _f64(y_pm), w, float(b), np.ascontiguousarray(order, dtype=np.int64),
        float(alpha), float(step), float(t0),
    )


GINI, ENTROPY = 0, 1

__all__ = [
    "BACKEND",
    "ENTROPY",
    "GINI",
    "best_split_classification",
    "best_split_regression",
    "knn_search",
    "sgd_hinge_epoch",
]

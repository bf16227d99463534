from __future__ import annotations

import numpy as np

from .. import kernels
from ..errors import DataError
from .base import ClassifierModel, register


@register
class KNNModel(ClassifierModel):
    """Exact k-nearest-neighbour vote; the score is the positive fraction among neighbours.

    ``leaf_size`` is accepted for signature compatibility and has no effect
    (the search is brute force).
    """

    kind = "knn"

    def __init__(self, n_features, X, y, n_neighbors=5, p=2, leaf_size=30):
        super().__init__(n_features)
        self.X = np.ascontiguousarray(X, dtype=np.float64)
        self.y = np.asarray(y, dtype=np.float64)
        self.n_neighbors = int(n_neighbors)
        self.p = float(p)
        self.leaf_size = leaf_size

    @classmethod
    def fit(cls, X, y, n_neighbors=5, p=2, leaf_size=30):
        X = np.asarray(X, dtype=np.float64)
        if len(X) == 0:
            raise DataError("knn: empty training set")
        if n_neighbors > len(X):
            raise DataError(f"knn: n_neighbors={n_neighbors} exceeds {len(X)} training rows")
        return cls(X.shape[1], X, y, n_neighbors, p, leaf_size)

    def _score(self, X):
        idx, _ = kernels.knn_search(X, self.X, self.n_neighbors, self.p, False)
        return self.y[idx].mean(axis=1)

    def state(self):
        return {"X": self.X.tolist(), "y": self.y.tolist(), "n_neighbors": self.n_neighbors,
                "p": self.p, "leaf_size": self.leaf_size}

    @classmethod
    def from_state(cls, state, n_features):
        return cls(n_features, np.array(state["X"]).reshape(-1, n_features), state["y"],
                   state["n_neighbors"], state["p"], state["leaf_size"])

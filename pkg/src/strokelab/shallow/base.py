from __future__ import annotations

import numpy as np

from ..errors import DataError

FORMAT = "strokelab.model/1"
REGISTRY: dict[str, type["ClassifierModel"]] = {}


def register(cls):
    REGISTRY[cls.kind] = cls
    return cls


class ClassifierModel:
    """Fitted binary classifier producing scores in [0, 1]."""

    kind = "abstract"

    def __init__(self, n_features: int):
        self.n_features = int(n_features)

    def _check(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise DataError(f"{self.kind}: expected {self.n_features} feature columns, got shape {X.shape}")
        return X

    def score(self, X) -> np.ndarray:
        return np.clip(self._score(self._check(X)), 0.0, 1.0)

    def label(self, X, threshold: float = 0.5) -> np.ndarray:
        if not 0.0 < threshold < 1.0:
            raise DataError("threshold must lie in (0, 1)")
        return (self.score(X) > threshold).astype(np.int64)

    def _score(self, X) -> np.ndarray:
        raise NotImplementedError

    # persistence -------------------------------------------------------
    def state(self) -> dict:
        raise NotImplementedError

    @classmethod
    def from_state(cls, state: dict, n_features: int) -> "ClassifierModel":
        raise NotImplementedError

    def to_dict(self) -> dict:
        return {"format": FORMAT, "kind": self.kind, "n_features": self.n_features, "state": self.state()}


def model_from_dict(d: dict) -> ClassifierModel:
    if d.get("format") != FORMAT:
        raise DataError(f"unsupported model format {d.get('format')!r}")
    try:
        cls = REGISTRY[d["kind"]]
    except KeyError:
        raise DataError(f"unknown model kind {d.get('kind')!r}") from None
    return cls.from_state(d["state"], d["n_features"])


def sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(z, dtype=np.float64)))


def require_both_classes(y, who: str):
    if len(y) == 0:
        raise DataError(f"{who}: empty training set")
    if y.min() == y.max():
        raise DataError(f"{who}: training data holds a single class")

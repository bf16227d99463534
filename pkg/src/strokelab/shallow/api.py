from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import DataError
from ..ingest import Dataset
from .base import ClassifierModel, model_from_dict
from .bayes import GaussianNBModel, QDAModel
from .boosting import AdaBoostModel, GradientBoostingModel
from .linear import LinearSGDModel, LogisticModel
from .mlp import MLPModel
from .neighbors import KNNModel
from .specs import ClassifierSpec
from .tree import DecisionTreeModel


def fit_classifier(spec: ClassifierSpec, train: Dataset) -> ClassifierModel:
    """Fit the algorithm named by ``spec`` on ``train``."""
    if len(train) == 0:
        raise DataError("empty training set")
    X, y, p = train.X, train.y, dict(spec.params)
    k = spec.kind
    if k == "logistic":
        return LogisticModel.fit(X, y, **p)
    if k == "sgd":
        return LinearSGDModel.fit(X, y, seed=spec.seed, **p)
    if k == "tree":
        return DecisionTreeModel.fit(X, y, **p)
    if k == "adaboost":
        return AdaBoostModel.fit(X, y, **p)
    if k == "gaussian_nb":
        return GaussianNBModel.fit(X, y, **p)
    if k == "qda":
        return QDAModel.fit(X, y, **p)
    if k == "mlp":
        p.pop("activation")
        return MLPModel.fit(X, y, seed=spec.seed, **p)
    if k == "knn":
        return KNNModel.fit(X, y, **p)
    if k == "gbc":
        return GradientBoostingModel.fit(X, y, **p)
    raise AssertionError(k)


def predict_scores(model: ClassifierModel, X) -> np.ndarray:
    return model.score(X)


def predict_labels(model: ClassifierModel, X, threshold: float = 0.5) -> np.ndarray:
    """1 where the score is strictly above ``threshold``."""
    return model.label(X, threshold)


def save_model(model: ClassifierModel, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(model.to_dict()))
    return path


def load_model(path) -> ClassifierModel:
    return model_from_dict(json.loads(Path(path).read_text()))

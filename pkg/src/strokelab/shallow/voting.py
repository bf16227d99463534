from __future__ import annotations

from typing import Sequence

import numpy as np

from ..errors import ConfigError, DataError
from ..ingest import Dataset, stratified_indices
from ..metrics import compute_metrics, roc_auc
from .base import ClassifierModel, model_from_dict, register
from .specs import ClassifierSpec

WEIGHT_FLOOR = 1e-3


@register
class VotingEnsemble(ClassifierModel):
    """Soft vote: the score is the weighted mean of member scores."""

    kind = "voting"

    def __init__(self, n_features, members: Sequence[ClassifierModel], weights, names=None,
                 weighting: str = "uniform"):
        super().__init__(n_features)
        weights = np.asarray(weights, dtype=np.float64)
        if len(members) != len(weights):
            raise ConfigError("one weight per member is required")
        if (weights < 0).any() or weights.sum() <= 0:
            raise ConfigError("weights must be non-negative with a positive sum")
        self.members = list(members)
        self.weights = weights / weights.sum()
        self.names = list(names) if names else [m.kind for m in members]
        self.weighting = weighting

    def member_scores(self, X) -> np.ndarray:
        X = self._check(X)
        return np.array([m.score(X) for m in self.members])

    def _score(self, X):
        return self.weights @ np.array([m.score(X) for m in self.members])

    def state(self):
        return {"members": [m.to_dict() for m in self.members], "weights": self.weights.tolist(),
                "names": self.names, "weighting": self.weighting}

    @classmethod
    def from_state(cls, state, n_features):
        return cls(n_features, [model_from_dict(m) for m in state["members"]], state["weights"],
                   state["names"], state.get("weighting", "uniform"))


def _validation_metric(model, ds: Dataset, metric: str) -> float:
    scores = model.score(ds.X)
    if metric == "auc":
        return roc_auc(ds.y, scores)
    return compute_metrics(ds.y, (scores > 0.5).astype(int)).f1


def fit_weighted_voting(specs: Sequence[ClassifierSpec], train: Dataset, weighting: str = "f1",
                        validation_fraction: float = 0.2, seed: int = 0) -> VotingEnsemble:
    """Fit every member and combine them by soft voting.

    ``weighting`` is ``"uniform"`` or a validation metric (``"f1"`` or
    ``"auc"``): members are first fitted on a stratified subset, scored on
    the held-out part, weighted by ``max(metric, 1e-3)``, then refitted on
    all of ``train``.
    """
    from .api import fit_classifier

    if len(specs) < 2:
        raise ConfigError("a voting ensemble needs at least two members")
    if weighting not in ("uniform", "f1", "auc"):
        raise ConfigError(f"unknown weighting {weighting!r}")
    if weighting == "uniform":
        weights = np.ones(len(specs))
    else:
        tr_idx, va_idx = stratified_indices(train.y, validation_fraction, seed)
        sub, val = train.subset(tr_idx), train.subset(va_idx)
        if val.y.min() == val.y.max():
            raise DataError("validation holdout lacks a class")
        weights = np.array([max(_validation_metric(fit_classifier(s, sub), val, weighting), WEIGHT_FLOOR)
                            for s in specs])
    members = [fit_classifier(s, train) for s in specs]
    return VotingEnsemble(train.n_features, members, weights, [s.name for s in specs], weighting)

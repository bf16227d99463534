"""AdaBoost (SAMME over stumps) and logistic-loss gradient boosting."""
from __future__ import annotations

import numpy as np

from .. import kernels
from .base import ClassifierModel, register, require_both_classes, sigmoid
from .tree import TreeStructure, grow_classification_tree, grow_regression_tree


@register
class AdaBoostModel(ClassifierModel):
    """Score is ``(1 + sum(a_m h_m) / sum(a_m)) / 2`` with stump votes ``h_m`` in {-1, +1}."""

    kind = "adaboost"

    def __init__(self, n_features, stumps, alphas):
        super().__init__(n_features)
        self.stumps = list(stumps)
        self.alphas = np.asarray(alphas, dtype=np.float64)

    @classmethod
    def fit(cls, X, y, learning_rate=1.0, n_estimators=50):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y)
        require_both_classes(y, "adaboost")
        n = len(y)
        w = np.full(n, 1.0 / n)
        stumps, alphas = [], []
        for _ in range(n_estimators):
            stump, _ = grow_classification_tree(X, y, w, kernels.GINI, 1)
            pred = (stump.predict(X) > 0.5).astype(int)
            miss = pred != y
            err = float(w[miss].sum() / w.sum())
            if err <= 0.0:
                stumps.append(stump)
                alphas.append(1.0)
                break
            if err >= 0.5:
                if not stumps:
                    stumps.append(stump)
                    alphas.append(1.0)
                break
            alpha = learning_rate * np.log((1.0 - err) / err)
            stumps.append(stump)
            alphas.append(alpha)
            w = w * np.exp(alpha * miss)
            w /= w.sum()
        return cls(X.shape[1], stumps, alphas)

    def decision_function(self, X):
        X = self._check(X)
        votes = np.array([np.where(s.predict(X) > 0.5, 1.0, -1.0) for s in self.stumps])
        return self.alphas @ votes / self.alphas.sum()

    def _score(self, X):
        return 0.5 * (1.0 + self.decision_function(X))

    def state(self):
        return {"stumps": [s.to_nested() for s in self.stumps], "alphas": self.alphas.tolist()}

    @classmethod
    def from_state(cls, state, n_features):
        return cls(n_features, [TreeStructure.from_nested(s) for s in state["stumps"]], state["alphas"])


@register
class GradientBoostingModel(ClassifierModel):
    """Binomial-deviance boosting with Newton-step leaf values."""

    kind = "gbc"

    def __init__(self, n_features, init, trees, learning_rate):
        super().__init__(n_features)
        self.init = float(init)
        self.trees = list(trees)
        self.learning_rate = float(learning_rate)

    @classmethod
    def fit(cls, X, y, n_estimators=100, learning_rate=0.1, tree_depth=3):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        require_both_classes(y, "gbc")
        prior = y.mean()
        init = np.log(prior / (1.0 - prior))
        F = np.full(len(y), init)
        trees = []
        for _ in range(n_estimators):
            p = sigmoid(F)
            r = y - p
            hess = p * (1.0 - p)

            def newton(rows, r=r, hess=hess):
                den = hess[rows].sum()
                return float(r[rows].sum() / den) if den > 1e-12 else 0.0

            tree = grow_regression_tree(X, r, tree_depth, 1, newton)
            F += learning_rate * tree.predict(X)
            trees.append(tree)
        return cls(X.shape[1], init, trees, learning_rate)

    def decision_function(self, X):
        X = self._check(X)
        F = np.full(len(X), self.init)
        for t in self.trees:
            F += self.learning_rate * t.predict(X)
        return F

    def _score(self, X):
        return sigmoid(self.decision_function(X))

    def state(self):
        return {"init": self.init, "learning_rate": self.learning_rate,
                "trees": [t.to_nested() for t in self.trees]}

    @classmethod
    def from_state(cls, state, n_features):
        return cls(n_features, state["init"], [TreeStructure.from_nested(t) for t in state["trees"]],
                   state["learning_rate"])

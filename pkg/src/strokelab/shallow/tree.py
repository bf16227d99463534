"""Greedy binary decision trees (classification and squared-error regression)."""
from __future__ import annotations

import numpy as np

from .. import kernels
from ..errors import DataError
from .base import ClassifierModel, register

LEAF = -1


class TreeStructure:
    """Flat node arrays; ``feature == LEAF`` marks a leaf."""

    def __init__(self):
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[float] = []
        self.n_samples: list[int] = []

    def add(self, value, n) -> int:
        self.feature.append(LEAF)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(float(value))
        self.n_samples.append(int(n))
        return len(self.feature) - 1

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def depth(self) -> int:
        def d(i):
            return 0 if self.feature[i] == LEAF else 1 + max(d(self.left[i]), d(self.right[i]))
        return d(0) if self.feature else 0

    def apply(self, X) -> np.ndarray:
        """Leaf index reached by every row."""
        out = np.empty(len(X), dtype=np.int64)
        stack = [(0, np.arange(len(X)))]
        while stack:
            node, rows = stack.pop()
            f = self.feature[node]
            if f == LEAF:
                out[rows] = node
                continue
            go_left = X[rows, f] <= self.threshold[node]
            stack.append((self.left[node], rows[go_left]))
            stack.append((self.right[node], rows[~go_left]))
        return out

    def predict(self, X) -> np.ndarray:
        return np.asarray(self.value)[self.apply(X)]

    def to_nested(self, i: int = 0) -> dict:
        if self.feature[i] == LEAF:
            return {"value": self.value[i], "n": self.n_samples[i]}
        return {
            "feature": self.feature[i], "threshold": self.threshold[i],
            "value": self.value[i], "n": self.n_samples[i],
            "left": self.to_nested(self.left[i]), "right": self.to_nested(self.right[i]),
        }

    @classmethod
    def from_nested(cls, node: dict) -> "TreeStructure":
        t = cls()

        def build(d):
            i = t.add(d["value"], d.get("n", 0))
            if "feature" in d:
                t.feature[i] = int(d["feature"])
                t.threshold[i] = float(d["threshold"])
                t.left[i] = build(d["left"])
                t.right[i] = build(d["right"])
            return i

        build(node)
        return t


def _impurity(pos_w, tot_w, criterion):
    if tot_w <= 0:
        return 0.0
    p = min(max(pos_w / tot_w, 0.0), 1.0)
    q = 1.0 - p
    if criterion == kernels.GINI:
        return 1.0 - (p * p + q * q)
    h = 0.0
    for v in (p, q):
        if v > 0:
            h -= v * np.log2(v)
    return h


def grow_classification_tree(X, y, w, criterion: int, max_depth, min_samples_leaf: int = 1):
    """Returns ``(tree, importances)``; importances are unnormalized weighted impurity drops."""
    n, d = X.shape
    tree = TreeStructure()
    importances = np.zeros(d)
    w_root = float(w.sum())
    yf = y.astype(np.float64)

    def grow(rows, depth):
        ws = w[rows]
        tot = float(ws.sum())
        pos = float((ws * yf[rows]).sum())
        node = tree.add(pos / tot if tot > 0 else 0.0, len(rows))
        parent = _impurity(pos, tot, criterion)
        if (max_depth is not None and depth >= max_depth) or len(rows) < 2 * min_samples_leaf \
                or parent <= 0.0 or tot <= 0:
            return node
        best = (np.inf, -1, np.nan)
        for f in range(d):
            xs = X[rows, f]
            order = np.argsort(xs, kind="stable")
            child, thr = kernels.best_split_classification(
                xs[order], yf[rows][order], ws[order], criterion, min_samples_leaf)
            if child < best[0] - _tie_margin(best[0]):
                best = (child, f, thr)
        child, f, thr = best
        if f < 0 or not child < parent - 1e-12:
            return node
        importances[f] += tot / w_root * (parent - child)
        go_left = X[rows, f] <= thr
        tree.feature[node] = f
        tree.threshold[node] = float(thr)
        tree.left[node] = grow(rows[go_left], depth + 1)
        tree.right[node] = grow(rows[~go_left], depth + 1)
        return node

    grow(np.arange(n), 0)
    return tree, importances


def grow_regression_tree(X, r, max_depth: int, min_samples_leaf: int = 1, leaf_value=None):
    """Squared-error tree on residuals ``r``.

    ``leaf_value(rows)`` sets each leaf's output (defaults to the mean).
    """
    n, d = X.shape
    tree = TreeStructure()
    leaf_value = leaf_value or (lambda rows: float(r[rows].mean()))

    def grow(rows, depth):
        node = tree.add(0.0, len(rows))
        rr = r[rows]
        parent = float(((rr - rr.mean()) ** 2).sum())
        split = None
        if depth < max_depth and len(rows) >= 2 * min_samples_leaf and parent > 1e-12:
            best = (np.inf, -1, np.nan)
            for f in range(d):
                xs = X[rows, f]
                order = np.argsort(xs, kind="stable")
                child, thr = kernels.best_split_regression(xs[order], rr[order], min_samples_leaf)
                if child < best[0] - _tie_margin(best[0]):
                    best = (child, f, thr)
            if best[1] >= 0 and best[0] < parent - 1e-12 * (1 + parent):
                split = best
        if split is None:
            tree.value[node] = leaf_value(rows)
            return node
        _, f, thr = split
        go_left = X[rows, f] <= thr
        tree.feature[node] = f
        tree.threshold[node] = float(thr)
        tree.left[node] = grow(rows[go_left], depth + 1)
        tree.right[node] = grow(rows[~go_left], depth + 1)
        return node

    grow(np.arange(n), 0)
    return tree


def _tie_margin(best: float) -> float:
    # a later feature must beat the incumbent by more than rounding noise
    return 0.0 if not np.isfinite(best) else 1e-12 * (1.0 + abs(best))


@register
class DecisionTreeModel(ClassifierModel):
    kind = "tree"

    def __init__(self, n_features, tree: TreeStructure, importances: np.ndarray):
        super().__init__(n_features)
        self.tree = tree
        self.feature_importances = importances

    @classmethod
    def fit(cls, X, y, criterion="gini", max_depth=None, min_samples_leaf=1, sample_weight=None):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y)
        if len(y) == 0:
            raise DataError("tree: empty training set")
        w = np.ones(len(y)) if sample_weight is None else np.asarray(sample_weight, dtype=np.float64)
        crit = kernels.GINI if criterion == "gini" else kernels.ENTROPY
        tree, imp = grow_classification_tree(X, y, w, crit, max_depth, min_samples_leaf)
        total = imp.sum()
        return cls(X.shape[1], tree, imp / total if total > 0 else imp)

    def _score(self, X):
        return self.tree.predict(X)

    def state(self):
        return {"tree": self.tree.to_nested(), "importances": self.feature_importances.tolist()}

    @classmethod
    def from_state(cls, state, n_features):
        return cls(n_features, TreeStructure.from_nested(state["tree"]), np.array(state["importances"]))

from __future__ import annotations

import numpy as np

from .. import kernels
from .base import ClassifierModel, register, require_both_classes, sigmoid


class _LinearModel(ClassifierModel):
    def __init__(self, n_features, coef, intercept):
        super().__init__(n_features)
        self.coef = np.asarray(coef, dtype=np.float64)
        self.intercept = float(intercept)

    def decision_function(self, X):
        return self._check(X) @ self.coef + self.intercept

    def _score(self, X):
        return sigmoid(X @ self.coef + self.intercept)

    def state(self):
        return {"coef": self.coef.tolist(), "intercept": self.intercept}

    @classmethod
    def from_state(cls, state, n_features):
        return cls(n_features, state["coef"], state["intercept"])


@register
class LogisticModel(_LinearModel):
    """Penalized logistic regression.

    Minimizes ``C * sum(log_loss) + R(w)`` with ``R = ||w||_1`` (``l1``) or
    ``||w||^2 / 2`` (``l2``); the intercept is not penalized. Solved by
    FISTA with a constant step from the Lipschitz bound.
    """

    kind = "logistic"

    @classmethod
    def fit(cls, X, y, penalty="l2", C=1.0, max_iter=5000, tol=1e-8):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        require_both_classes(y, "logistic")
        n, d = X.shape
        A = np.hstack([X, np.ones((n, 1))])
        # objective scaled by 1/(C n): mean log-loss + R(w)/(C n)
        lam = 1.0 / (C * n)
        lip = np.linalg.norm(A, 2) ** 2 / (4.0 * n) + (lam if penalty == "l2" else 0.0)
        step = 1.0 / lip
        theta = np.zeros(d + 1)
        z = theta.copy()
        t = 1.0
        for _ in range(max_iter):
            p = sigmoid(A @ z)
            grad = A.T @ (p - y) / n
            if penalty == "l2":
                grad[:d] += lam * z[:d]
            nxt = z - step * grad
            if penalty == "l1":
                nxt[:d] = np.sign(nxt[:d]) * np.maximum(np.abs(nxt[:d]) - step * lam, 0.0)
            t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
            z = nxt + (t - 1.0) / t_next * (nxt - theta)
            delta = np.max(np.abs(nxt - theta))
            theta, t = nxt, t_next
            if delta < tol:
                break
        return cls(d, theta[:d], theta[d])


@register
class LinearSGDModel(_LinearModel):
    """Hinge-loss linear classifier trained by per-sample SGD with L2 decay.

    Scores are the logistic link of the margin. Training stops early once the
    epoch's mean hinge loss has failed to improve by ``tol`` for
    ``n_iter_no_change`` consecutive epochs.
    """

    kind = "sgd"

    @classmethod
    def fit(cls, X, y, alpha=1e-4, learning_rate=1e-3, epochs=1000, tol=1e-3,
            n_iter_no_change=5, seed=0, **_):
        X = np.ascontiguousarray(X, dtype=np.float64)
        y = np.asarray(y)
        require_both_classes(y, "sgd")
        n, d = X.shape
        y_pm = np.where(y == 1, 1.0, -1.0)
        rng = np.random.default_rng(seed)
        w = np.zeros(d)
        b = 0.0
        best, stale, t = np.inf, 0, 0.0
        model = cls(d, w, b)
        for _ in range(epochs):
            b, loss = kernels.sgd_hinge_epoch(X, y_pm, w, b, rng.permutation(n), alpha, learning_rate, t)
            t += n
            if tol is not None:
                if loss > best - tol:
                    stale += 1
                else:
                    stale = 0
                best = min(best, loss)
                if stale >= n_iter_no_change:
                    break
        model.coef, model.intercept = w, float(b)
        model.epochs_run = _ + 1
        return model

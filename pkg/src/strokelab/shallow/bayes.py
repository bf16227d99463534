"""Gaussian generative classifiers: naive Bayes and regularized QDA."""
from __future__ import annotations

import numpy as np

from ..errors import DataError
from .base import ClassifierModel, register, require_both_classes


def _posterior(log_joint):
    # log_joint: (n, 2) -> P(class 1)
    m = log_joint.max(axis=1, keepdims=True)
    e = np.exp(log_joint - m)
    return e[:, 1] / e.sum(axis=1)


@register
class GaussianNBModel(ClassifierModel):
    kind = "gaussian_nb"

    def __init__(self, n_features, means, variances, log_priors):
        super().__init__(n_features)
        self.means = np.asarray(means, dtype=np.float64)
        self.variances = np.asarray(variances, dtype=np.float64)
        self.log_priors = np.asarray(log_priors, dtype=np.float64)

    @classmethod
    def fit(cls, X, y, var_floor=1e-9):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y)
        require_both_classes(y, "gaussian_nb")
        means = np.array([X[y == c].mean(axis=0) for c in (0, 1)])
        variances = np.array([X[y == c].var(axis=0) for c in (0, 1)]) + var_floor
        priors = np.array([np.mean(y == c) for c in (0, 1)])
        return cls(X.shape[1], means, variances, np.log(priors))

    def _score(self, X):
        lj = np.empty((len(X), 2))
        for c in (0, 1):
            lj[:, c] = self.log_priors[c] - 0.5 * (
                np.log(2 * np.pi * self.variances[c]).sum()
                + (((X - self.means[c]) ** 2) / self.variances[c]).sum(axis=1))
        return _posterior(lj)

    def state(self):
        return {"means": self.means.tolist(), "variances": self.variances.tolist(),
                "log_priors": self.log_priors.tolist()}

    @classmethod
    def from_state(cls, state, n_features):
        return cls(n_features, state["means"], state["variances"], state["log_priors"])


@register
class QDAModel(ClassifierModel):
    """Per-class Gaussians with covariance ``(1 - r) * S + r * I``."""

    kind = "qda"

    def __init__(self, n_features, means, covariances, log_priors):
        super().__init__(n_features)
        self.means = np.asarray(means, dtype=np.float64)
        self.covariances = np.asarray(covariances, dtype=np.float64)
        self.log_priors = np.asarray(log_priors, dtype=np.float64)
        self._prep()

    def _prep(self):
        self._chol = [np.linalg.cholesky(S) for S in self.covariances]
        self._logdet = [2.0 * np.log(np.diag(L)).sum() for L in self._chol]

    @classmethod
    def fit(cls, X, y, reg_param=0.0, tol=1e-4):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y)
        require_both_classes(y, "qda")
        d = X.shape[1]
        means, covs = [], []
        for c in (0, 1):
            Xc = X[y == c]
            if len(Xc) < 2:
                raise DataError("qda: each class needs at least two rows")
            mu = Xc.mean(axis=0)
            S = np.atleast_2d(np.cov(Xc, rowvar=False, ddof=1))
            S = (1.0 - reg_param) * S + reg_param * np.eye(d)
            if np.linalg.eigvalsh(S).min() < tol:
                raise DataError(f"qda: class {c} covariance is degenerate; increase reg_param")
            means.append(mu)
            covs.append(S)
        priors = np.array([np.mean(y == c) for c in (0, 1)])
        return cls(d, means, covs, np.log(priors))

    def _score(self, X):
        lj = np.empty((len(X), 2))
        for c in (0, 1):
            sol = np.linalg.solve(self._chol[c], (X - self.means[c]).T)
            lj[:, c] = self.log_priors[c] - 0.5 * (self._logdet[c] + (sol * sol).sum(axis=0))
        return _posterior(lj)

    def state(self):
        return {"means": self.means.tolist(), "covariances": self.covariances.tolist(),
                "log_priors": self.log_priors.tolist()}

    @classmethod
    def from_state(cls, state, n_features):
        return cls(n_features, state["means"], state["covariances"], state["log_priors"])

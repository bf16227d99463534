"""Classifier variants, their defaults, and the tuned settings of the comparison table."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from ..errors import ConfigError

DEFAULTS: dict[str, dict[str, Any]] = {
    "logistic": {"penalty": "l2", "C": 1.0, "max_iter": 5000, "tol": 1e-8},
    "sgd": {"loss": "hinge", "penalty": "l2", "alpha": 1e-4, "learning_rate": 1e-3,
            "epochs": 1000, "tol": 1e-3, "n_iter_no_change": 5},
    "tree": {"criterion": "gini", "max_depth": None, "min_samples_leaf": 1},
    "adaboost": {"learning_rate": 1.0, "n_estimators": 50},
    "gaussian_nb": {"var_floor": 1e-9},
    "qda": {"reg_param": 0.0, "tol": 1e-4},
    "mlp": {"hidden": 100, "activation": "relu", "epochs": 200, "step": 1e-3, "batch_size": 200},
    "knn": {"n_neighbors": 5, "p": 2, "leaf_size": 30},
    "gbc": {"n_estimators": 100, "learning_rate": 0.1, "tree_depth": 3},
}

DISPLAY_NAMES = {
    "logistic": "LR", "sgd": "SGD", "tree": "DTC", "adaboost": "AdaBoost",
    "gaussian_nb": "Gaussian", "qda": "QDA", "mlp": "MLP", "knn": "KNeighbors", "gbc": "GBC",
}


@dataclass(frozen=True)
class ClassifierSpec:
    kind: str
    params: dict[str, Any] = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in DEFAULTS:
            raise ConfigError(f"unknown classifier kind {self.kind!r}")
        unknown = set(self.params) - set(DEFAULTS[self.kind])
        if unknown:
            raise ConfigError(f"{self.kind}: unknown parameter(s) {sorted(unknown)}")
        merged = {**DEFAULTS[self.kind], **self.params}
        object.__setattr__(self, "params", merged)
        _validate(self.kind, merged)

    @property
    def name(self) -> str:
        return DISPLAY_NAMES[self.kind]

    def replace(self, **params) -> "ClassifierSpec":
        seed = params.pop("seed", self.seed)
        return ClassifierSpec(self.kind, {**self.params, **params}, seed)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": dict(self.params), "seed": self.seed}

    @classmethod
    def from_dict(cls, d: dict) -> "ClassifierSpec":
        return cls(d["kind"], dict(d.get("params", {})), int(d.get("seed", 0)))


def _validate(kind: str, p: dict) -> None:
    def need(cond, msg):
        if not cond:
            raise ConfigError(f"{kind}: {msg}")

    if kind == "logistic":
        need(p["penalty"] in ("l1", "l2"), "penalty must be l1 or l2")
        need(p["C"] > 0, "C must be positive")
    elif kind == "sgd":
        need(p["loss"] == "hinge", "only hinge loss is supported")
        need(p["penalty"] == "l2", "only l2 penalty is supported")
        need(p["epochs"] >= 1 and p["learning_rate"] > 0, "epochs >= 1 and learning_rate > 0")
    elif kind == "tree":
        need(p["criterion"] in ("gini", "entropy"), "criterion must be gini or entropy")
        need(p["max_depth"] is None or p["max_depth"] >= 1, "max_depth must be >= 1")
    elif kind == "adaboost":
        need(p["n_estimators"] >= 1 and p["learning_rate"] > 0, "n_estimators >= 1, learning_rate > 0")
    elif kind == "qda":
        need(0.0 <= p["reg_param"] <= 1.0, "reg_param must lie in [0, 1]")
    elif kind == "mlp":
        need(p["activation"] == "relu", "only relu activation is supported")
        need(p["hidden"] >= 1 and p["epochs"] >= 1, "hidden >= 1 and epochs >= 1")
    elif kind == "knn":
        need(p["n_neighbors"] >= 1 and p["p"] >= 1, "n_neighbors >= 1 and p >= 1")
    elif kind == "gbc":
        need(p["n_estimators"] >= 1 and p["tree_depth"] >= 1, "n_estimators >= 1, tree_depth >= 1")


def table3_specs(seed: int = 0) -> list[ClassifierSpec]:
    """The nine implemented classifiers with their tuned settings (XGB excluded)."""
    return [
        ClassifierSpec("logistic", {"penalty": "l1", "C": 0.2336}, seed),
        ClassifierSpec("sgd", {"loss": "hinge", "penalty": "l2"}, seed),
        ClassifierSpec("tree", {"criterion": "entropy", "max_depth": 3}, seed),
        ClassifierSpec("adaboost", {"learning_rate": 0.5, "n_estimators": 200}, seed),
        ClassifierSpec("gaussian_nb", {}, seed),
        ClassifierSpec("qda", {"reg_param": 0.1, "tol": 1e-4}, seed),
        ClassifierSpec("mlp", {}, seed),
        ClassifierSpec("knn", {"leaf_size": 1, "n_neighbors": 11, "p": 1}, seed),
        ClassifierSpec("gbc", {"n_estimators": 80}, seed),
    ]

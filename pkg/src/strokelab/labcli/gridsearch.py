"""Exhaustive grid search with stratified k-fold cross-validation."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, DataError
from ..ingest import Dataset
from ..metrics import evaluate
from ..shallow import ClassifierSpec, fit_classifier

METRICS = ("f1", "auc", "auc_score")


@dataclass
class GridResult:
    best_params: dict
    best_score: float
    cells: list[tuple[dict, float]]     # declaration order, mean fold score


def stratified_folds(y: np.ndarray, n_folds: int, seed: int = 0) -> np.ndarray:
    """Fold id per row; each class is shuffled and dealt round-robin."""
    if n_folds < 2:
        raise ConfigError("need at least two folds")
    rng = np.random.default_rng(seed)
    fold = np.empty(len(y), dtype=np.int64)
    for cls in (0, 1):
        members = np.flatnonzero(y == cls)
        if len(members) < n_folds:
            raise DataError(f"class {cls} has fewer than {n_folds} rows")
        fold[rng.permutation(members)] = np.arange(len(members)) % n_folds
    return fold


def grid_cells(grid: dict[str, list]) -> list[dict]:
    """Cartesian product in declaration order (last key varies fastest)."""
    if not grid or any(len(v) == 0 for v in grid.values()):
        raise ConfigError("every grid axis needs at least one value")
    keys = list(grid)
    return [dict(zip(keys, combo)) for combo in itertools.product(*grid.values())]


def grid_search(spec: ClassifierSpec, grid: dict[str, list], train: Dataset, n_folds: int = 5,
                metric: str = "f1", seed: int = 0, threshold: float = 0.5) -> GridResult:
    """Mean validation ``metric`` for every cell; the first best cell wins ties."""
    if metric not in METRICS:
        raise ConfigError(f"metric must be one of {METRICS}")
    cells = grid_cells(grid)
    fold = stratified_folds(train.y, n_folds, seed)
    scored = []
    best, best_score = None, -np.inf
    for cell in cells:
        vals = []
        for f in range(n_folds):
            fit_ds, val_ds = train.subset(np.flatnonzero(fold != f)), train.subset(np.flatnonzero(fold == f))
            model = fit_classifier(spec.replace(**cell), fit_ds)
            rep, score_auc = evaluate(val_ds.y, model.score(val_ds.X), threshold)
            vals.append({"f1": rep.f1, "auc": rep.auc, "auc_score": score_auc}[metric])
        mean = float(np.mean(vals))
        scored.append((cell, mean))
        if mean > best_score:
            best, best_score = cell, mean
    return GridResult(best, best_score, scored)

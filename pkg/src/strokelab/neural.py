"""Fully connected ReLU network with a sigmoid output, trained by momentum SGD.

Two losses are supported: binary cross-entropy and the focal loss
``-(1 - p_t)**gamma * log(p_t)``, where ``p_t`` is the probability given
to the true class.
"""
from __future__ import annotations

import copy
import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DataError, TrainingError
from .ingest import Dataset
from .metrics import evaluate

EPS = 1e-12


@dataclass
class NetworkParams:
    weights: list[np.ndarray]
    biases: list[np.ndarray]

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[0]

    @property
    def hidden(self) -> tuple[int, ...]:
        return tuple(w.shape[1] for w in self.weights[:-1])

    def copy(self) -> "NetworkParams":
        return copy.deepcopy(self)

    def to_dict(self) -> dict:
        return {
            "format": "strokelab.network/1",
            "input_dim": self.input_dim,
            "hidden": list(self.hidden),
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NetworkParams":
        if d.get("format") != "strokelab.network/1":
            raise DataError(f"unsupported network format {d.get('format')!r}")
        return cls([np.array(w, dtype=np.float64) for w in d["weights"]],
                   [np.array(b, dtype=np.float64) for b in d["biases"]])


@dataclass(frozen=True)
class LossSpec:
    kind: str = "ce"       # "ce" | "focal"
    gamma: float = 0.0

    def __post_init__(self):
        if self.kind not in ("ce", "focal"):
            raise DataError(f"unknown loss {self.kind!r}")
        if self.gamma < 0:
            raise DataError("gamma must be >= 0")

    @classmethod
    def ce(cls) -> "LossSpec":
        return cls("ce", 0.0)

    @classmethod
    def focal(cls, gamma: float = 2.0) -> "LossSpec":
        return cls("focal", float(gamma))


@dataclass
class TrainingHistory:
    loss: list[float] = field(default_factory=list)
    f1: list[float] = field(default_factory=list)
    auc: list[float] = field(default_factory=list)
    auc_score: list[float] = field(default_factory=list)
    accuracy: list[float] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.loss)

    def rows(self):
        for i, loss in enumerate(self.loss):
            ev = i < len(self.f1)
            yield {
                "epoch": i + 1, "loss": loss,
                "f1": self.f1[i] if ev else None,
                "auc": self.auc[i] if ev else None,
                "auc_score": self.auc_score[i] if ev else None,
                "accuracy": self.accuracy[i] if ev else None,
            }


def init_network(input_dim: int, hidden: Sequence[int] = (64, 128, 256), seed: int = 0) -> NetworkParams:
    """Glorot-uniform weights, zero biases."""
    if input_dim < 1:
        raise DataError("input_dim must be >= 1")
    rng = np.random.default_rng(seed)
    dims = [int(input_dim)] + [int(h) for h in hidden] + [1]
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return NetworkParams(weights, biases)


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _check_input(params: NetworkParams, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != params.input_dim:
        raise DataError(f"expected {params.input_dim} input columns")
    if not np.all(np.isfinite(X)):
        raise DataError("non-finite input")
    return X


def _forward_cache(params, X):
    acts, pre = [X], []
    a = X
    last = len(params.weights) - 1
    for i, (W, b) in enumerate(zip(params.weights, params.biases)):
        z = a @ W + b
        pre.append(z)
        if i < last:
            a = np.maximum(z, 0.0)
            acts.append(a)
    return acts, pre, _sigmoid(pre[-1][:, 0])


def forward(params: NetworkParams, X) -> np.ndarray:
    """Probability of the positive class for every row."""
    return _forward_cache(params, _check_input(params, X))[2]


def compute_loss(p, y, spec: LossSpec) -> tuple[float, np.ndarray]:
    """Mean loss and per-sample ``p_t`` (after clamping to ``[EPS, 1 - EPS]``)."""
    p = np.asarray(p, dtype=np.float64)
    y = np.asarray(y)
    if p.shape != y.shape:
        raise DataError("p and y differ in length")
    pc = np.clip(p, EPS, 1.0 - EPS)
    p_t = np.where(y == 1, pc, 1.0 - pc)
    ce = -np.log(p_t)
    if spec.kind == "ce":
        return float(ce.mean()), p_t
    return float(((1.0 - p_t) ** spec.gamma * ce).mean()), p_t


def _logit_grad(p, y, spec: LossSpec) -> np.ndarray:
    """d(mean loss)/d(logit); zero where the probability was clamped."""
    n = len(p)
    active = (p > EPS) & (p < 1.0 - EPS)
    if spec.kind == "ce":
        g = p - y
    else:
        pc = np.clip(p, EPS, 1.0 - EPS)
        p_t = np.where(y == 1, pc, 1.0 - pc)
        sign = np.where(y == 1, 1.0, -1.0)
        q = 1.0 - p_t
        g = sign * (spec.gamma * p_t * q ** spec.gamma * np.log(p_t) - q ** (spec.gamma + 1.0))
    return np.where(active, g, 0.0) / n


def gradients(params: NetworkParams, X, y, spec: LossSpec):
    """Backpropagated gradients ``(dW, db, mean_loss)`` of the mean loss."""
    X = _check_input(params, X)
    y = np.asarray(y)
    acts, pre, p = _forward_cache(params, X)
    loss, _ = compute_loss(p, y, spec)
    delta = _logit_grad(p, y, spec)[:, None]
    n_layers = len(params.weights)
    dW = [None] * n_layers
    db = [None] * n_layers
    for i in range(n_layers - 1, -1, -1):
        dW[i] = acts[i].T @ delta
        db[i] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ params.weights[i].T) * (pre[i - 1] > 0)
        if not (np.all(np.isfinite(dW[i])) and np.all(np.isfinite(db[i]))):
            raise TrainingError(f"non-finite gradient at layer {i}")
    return dW, db, loss


class _Momentum:
    def __init__(self, params: NetworkParams, step: float, momentum: float):
        self.step, self.momentum = step, momentum
        self.vW = [np.zeros_like(w) for w in params.weights]
        self.vb = [np.zeros_like(b) for b in params.biases]

    def apply(self, params: NetworkParams, dW, db):
        for i in range(len(params.weights)):
            self.vW[i] = self.momentum * self.vW[i] - self.step * dW[i]
            self.vb[i] = self.momentum * self.vb[i] - self.step * db[i]
            params.weights[i] += self.vW[i]
            params.biases[i] += self.vb[i]


def _record_eval(history, params, eval_ds, threshold):
    if eval_ds is None:
        return
    rep, score_auc = evaluate(eval_ds.y, forward(params, eval_ds.X), threshold)
    history.f1.append(rep.f1)
    history.auc.append(rep.auc)
    history.auc_score.append(score_auc)
    history.accuracy.append(rep.accuracy)


def train(params: NetworkParams, train: Dataset, epochs: int, batch_size: int = 32,
          spec: LossSpec = LossSpec.ce(), step: float = 1e-3, seed: int = 0,
          eval: Dataset | None = None, momentum: float = 0.9,
          threshold: float = 0.25, callback=None) -> tuple[NetworkParams, TrainingHistory]:
    """Mini-batch momentum SGD, reshuffling rows every epoch.

    Returns a trained copy; the input parameters are left untouched. With
    ``eval`` the history also holds that set's F1/AUC after every epoch.
    ``callback(epoch, params)`` runs after each epoch.
    """
    if epochs < 1:
        raise DataError("epochs must be >= 1")
    params = params.copy()
    rng = np.random.default_rng(seed)
    opt = _Momentum(params, step, momentum)
    history = TrainingHistory()
    n = len(train)
    for epoch in range(1, epochs + 1):
        order = rng.permutation(n)
        total = 0.0
        for s in range(0, n, batch_size):
            idx = order[s:s + batch_size]
            dW, db, loss = gradients(params, train.X[idx], train.y[idx], spec)
            opt.apply(params, dW, db)
            total += loss * len(idx)
        epoch_loss = total / n
        if not np.isfinite(epoch_loss):
            raise TrainingError(f"loss diverged at epoch {epoch}")
        history.loss.append(epoch_loss)
        _record_eval(history, params, eval, threshold)
        if callback is not None:
            callback(epoch, params)
    return params, history


def train_cluster_batches(params: NetworkParams, batches: Sequence[Dataset], epochs: int,
                          spec: LossSpec = LossSpec.focal(), step: float = 1e-3, seed: int = 0,
                          eval: Dataset | None = None, momentum: float = 0.9,
                          threshold: float = 0.25, callback=None) -> tuple[NetworkParams, TrainingHistory]:
    """One full-batch update per cluster batch per epoch, batches in shuffled order.

    The epoch loss is the unweighted mean of the batch losses.
    """
    if not batches:
        raise DataError("need at least one batch")
    if epochs < 1:
        raise DataError("epochs must be >= 1")
    dims = {b.n_features for b in batches}
    if len(dims) != 1:
        raise DataError("batches differ in feature dimension")
    params = params.copy()
    rng = np.random.default_rng(seed)
    opt = _Momentum(params, step, momentum)
    history = TrainingHistory()
    for epoch in range(1, epochs + 1):
        losses = []
        for b in rng.permutation(len(batches)):
            batch = batches[b]
            if len(batch) == 0:
                continue
            dW, db, loss = gradients(params, batch.X, batch.y, spec)
            opt.apply(params, dW, db)
            losses.append(loss)
        epoch_loss = float(np.mean(losses))
        if not np.isfinite(epoch_loss):
            raise TrainingError(f"loss diverged at epoch {epoch}")
        history.loss.append(epoch_loss)
        _record_eval(history, params, eval, threshold)
        if callback is not None:
            callback(epoch, params)
    return params, history


# ----------------------------------------------------------------- files

HISTORY_COLUMNS = ("epoch", "loss", "f1", "auc", "auc_score", "accuracy")


def save_params(params: NetworkParams, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(params.to_dict()))
    return path


def load_params(path) -> NetworkParams:
    return NetworkParams.from_dict(json.loads(Path(path).read_text()))


def write_history(history: TrainingHistory, path) -> Path:
    """One CSV row per epoch; evaluation columns are blank when not recorded."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, HISTORY_COLUMNS)
        w.writeheader()
        for row in history.rows():
            w.writerow({k: "" if v is None else v for k, v in row.items()})
    return path


def read_history(path) -> TrainingHistory:
    h = TrainingHistory()
    with Path(path).open(newline="") as fh:
        for row in csv.DictReader(fh):
            h.loss.append(float(row["loss"]))
            if row["f1"] != "":
                for k in ("f1", "auc", "auc_score", "accuracy"):
                    getattr(h, k).append(float(row[k]))
    return h

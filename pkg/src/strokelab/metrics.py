"""Confusion-matrix metrics and rank-based ROC AUC for binary labels."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import DataError


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    precision: float
    recall: float
    f1: float
    counts: ConfusionCounts
    auc: float | None = None

    def to_dict(self) -> dict:
        """Flat record with the fixed wire names."""
        d = {k: getattr(self, k) for k in ("accuracy", "precision", "recall", "f1", "auc")}
        d.update(asdict(self.counts))
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "MetricsReport":
        counts = ConfusionCounts(*(int(d[k]) for k in ("tp", "fp", "tn", "fn")))
        return cls(d["accuracy"], d["precision"], d["recall"], d["f1"], counts, d.get("auc"))


def _binary(v, name):
    v = np.asarray(v)
    if v.ndim != 1:
        raise DataError(f"{name} must be one-dimensional")
    if not np.isin(v, (0, 1)).all():
        raise DataError(f"{name} must contain only 0/1")
    return v.astype(np.int64)


def confusion(y_true, y_pred) -> ConfusionCounts:
    t, p = _binary(y_true, "y_true"), _binary(y_pred, "y_pred")
    if t.shape != p.shape:
        raise DataError("y_true and y_pred differ in length")
    tp = int(np.sum((t == 1) & (p == 1)))
    fp = int(np.sum((t == 0) & (p == 1)))
    fn = int(np.sum((t == 1) & (p == 0)))
    return ConfusionCounts(tp, fp, len(t) - tp - fp - fn, fn)


def compute_metrics(y_true, y_pred) -> MetricsReport:
    """Accuracy, precision, recall and F1 of the positive class.

    Any ratio with a zero denominator is reported as 0.
    """
    if len(y_true) == 0:
        raise DataError("empty input")
    c = confusion(y_true, y_pred)
    precision = c.tp / (c.tp + c.fp) if c.tp + c.fp else 0.0
    recall = c.tp / (c.tp + c.fn) if c.tp + c.fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return MetricsReport((c.tp + c.tn) / c.total, precision, recall, f1, c)


def roc_auc(y_true, scores) -> float:
    """Mann-Whitney AUC with ties counted as one half.

    Computed from midranks in O(n log n); equals the pairwise
    (wins + 0.5 * ties) / (n_pos * n_neg) count.
    """
    t = _binary(y_true, "y_true")
    s = np.asarray(scores, dtype=np.float64)
    if s.shape != t.shape:
        raise DataError("y_true and scores differ in length")
    n_pos = int(t.sum())
    n_neg = len(t) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DataError("AUC is undefined when only one class is present")
    order = np.argsort(s, kind="mergesort")
    sorted_s = s[order]
    # midrank of each tie block, 1-based; doubled to keep the arithmetic integral
    starts = np.r_[0, np.flatnonzero(np.diff(sorted_s)) + 1]
    ends = np.r_[starts[1:], len(s)]
    twice_rank = np.empty(len(s), dtype=np.int64)
    twice_rank[order] = np.repeat(starts + ends + 1, ends - starts)
    twice_u = int(twice_rank[t == 1].sum()) - n_pos * (n_pos + 1)
    return twice_u / (2 * n_pos * n_neg)


def roc_auc_pairwise(y_true, scores) -> float:
    """O(n_pos * n_neg) reference count of the same statistic."""
    t = _binary(y_true, "y_true")
    s = np.asarray(scores, dtype=np.float64)
    pos, neg = s[t == 1], s[t == 0]
    if len(pos) == 0 or len(neg) == 0:
        raise DataError("AUC is undefined when only one class is present")
    wins = 0.0
    for a in pos:
        for b in neg:
            wins += 1.0 if a > b else 0.5 if a == b else 0.0
    return wins / (len(pos) * len(neg))


def evaluate(y_true, scores, threshold: float) -> tuple[MetricsReport, float]:
    """Metrics of thresholded scores.

    The report's ``auc`` is the area under the ROC of the hard labels
    (the value tabulated in the experiment tables); the second return value
    is the ranking AUC of the raw scores.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = (scores > threshold).astype(np.int64)
    rep = compute_metrics(y_true, labels)
    label_auc = roc_auc(y_true, labels)
    score_auc = roc_auc(y_true, scores)
    return MetricsReport(rep.accuracy, rep.precision, rep.recall, rep.f1, rep.counts, label_auc), score_auc

"""Feature analysis: Pearson correlation, variance inflation factors, tree importances."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError
from .ingest import LABEL_COLUMN, Dataset
from .shallow.tree import DecisionTreeModel

COLLINEAR_R2 = 1.0 - 1e-10


@dataclass
class FeatureReport:
    names: list[str]
    correlation: np.ndarray
    vif: dict[str, float]
    importance: dict[str, float]
    constant: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "names": self.names,
            "correlation": self.correlation.tolist(),
            "vif": {k: (None if math.isinf(v) else v) for k, v in self.vif.items()},
            "vif_infinite": [k for k, v in self.vif.items() if math.isinf(v)],
            "importance": self.importance,
            "constant_columns": self.constant,
        }


def _with_label(ds: Dataset, include_label: bool):
    names = list(ds.feature_names)
    M = ds.X
    if include_label:
        names.append(LABEL_COLUMN)
        M = np.column_stack([M, ds.y.astype(np.float64)])
    return names, M


def correlation_matrix(ds: Dataset, include_label: bool = True) -> tuple[list[str], np.ndarray, list[str]]:
    """Pearson correlations over the features (and label).

    Returns ``(names, matrix, constant_columns)``; a constant column has
    correlation 0 with everything else and 1 with itself.
    """
    names, M = _with_label(ds, include_label)
    if M.shape[0] < 2:
        raise DataError("correlation needs at least two rows")
    C = M - M.mean(axis=0)
    sd = np.sqrt((C * C).sum(axis=0))
    flat = sd <= 1e-12 * max(1.0, float(np.abs(M).max(initial=0.0)))
    sd = np.where(flat, 1.0, sd)
    Z = C / sd
    Z[:, flat] = 0.0
    R = np.clip(Z.T @ Z, -1.0, 1.0)
    np.fill_diagonal(R, 1.0)
    R = 0.5 * (R + R.T)
    return names, R, [n for n, f in zip(names, flat) if f]


def vif(ds: Dataset, include_label: bool = False,
        groups: dict[str, tuple[str, ...]] | None = None) -> dict[str, float]:
    """VIF_j = 1 / (1 - R^2_j), R^2_j from OLS (with intercept) of column j on the others.

    Perfect collinearity and constant columns give ``inf``. ``groups``
    names sets of one-hot siblings; a sibling is never used as a regressor
    for another member of its own set.
    """
    names, M = _with_label(ds, include_label)
    n, d = M.shape
    if n < d + 1:
        raise DataError(f"VIF needs at least {d + 1} rows, got {n}")
    sibling = {}
    for members in (groups or {}).values():
        for m in members:
            sibling[m] = set(members) - {m}
    out = {}
    for j, name in enumerate(names):
        others = [k for k in range(d) if k != j and names[k] not in sibling.get(name, ())]
        target = M[:, j]
        sst = float(((target - target.mean()) ** 2).sum())
        if sst <= 0.0:
            out[name] = math.inf
            continue
        A = np.column_stack([np.ones(n), M[:, others]])
        coef, *_ = np.linalg.lstsq(A, target, rcond=None)
        resid = target - A @ coef
        r2 = 1.0 - float(resid @ resid) / sst
        out[name] = math.inf if r2 >= COLLINEAR_R2 else 1.0 / (1.0 - r2)
    return out


def tree_importance(ds: Dataset, max_depth: int | None = None, criterion: str = "gini") -> dict[str, float]:
    """Normalized impurity-decrease importances of a fitted decision tree."""
    if ds.y.min() == ds.y.max():
        raise DataError("feature importance needs both classes")
    model = DecisionTreeModel.fit(ds.X, ds.y, criterion=criterion, max_depth=max_depth)
    return dict(zip(ds.feature_names, model.feature_importances.tolist()))


def bottom_ranks(importance: dict[str, float]) -> dict[str, int]:
    """Competition rank from the bottom: 1 + number of strictly smaller importances."""
    vals = list(importance.values())
    return {k: 1 + sum(u < v for u in vals) for k, v in importance.items()}


def profile(ds: Dataset, max_depth: int | None = None, criterion: str = "gini") -> FeatureReport:
    names, R, constant = correlation_matrix(ds)
    return FeatureReport(
        names=names, correlation=R,
        vif=vif(ds, include_label=True, groups=ds.groups),
        importance=tree_importance(ds, max_depth, criterion),
        constant=constant,
    )


def _fmt(v: float) -> str:
    return "inf" if math.isinf(v) else f"{v:.1f}"


def vif_markdown(label_vif: dict[str, float], onehot_vif: dict[str, float],
                 onehot_groups: dict[str, tuple[str, ...]] | None = None) -> str:
    """Two-column VIF table (label vs one-hot encoding), one row per original feature."""
    onehot_groups = onehot_groups or {}
    member_of = {m: g for g, ms in onehot_groups.items() for m in ms}
    lines = ["| Feature | Label | One-Hot |", "|---|---|---|"]
    for name, v in label_vif.items():
        if name in onehot_groups:
            cells = ", ".join(f"({m[len(name) + 1:]}) {_fmt(onehot_vif[m])}" for m in onehot_groups[name])
        else:
            cells = _fmt(onehot_vif[name]) if name in onehot_vif else "n/a"
        lines.append(f"| {name} | {_fmt(v)} | {cells} |")
    for name, v in onehot_vif.items():
        if name not in label_vif and name not in member_of:
            lines.append(f"| {name} | n/a | {_fmt(v)} |")
    return "\n".join(lines) + "\n"


def write_report(report: FeatureReport, out_dir, stem: str = "profile") -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    js = out_dir / f"{stem}.json"
    js.write_text(json.dumps(report.to_dict(), indent=2))
    md = out_dir / f"{stem}.md"
    rows = ["| Feature | VIF | Importance |", "|---|---|---|"]
    for n in report.names:
        imp = report.importance.get(n)
        rows.append(f"| {n} | {_fmt(report.vif[n])} | {'' if imp is None else f'{imp:.3f}'} |")
    md.write_text("\n".join(rows) + "\n")
    return [js, md]

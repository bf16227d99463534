"""Load, clean, impute, encode, standardize and split the stroke table."""
from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .errors import DataError

REQUIRED_COLUMNS = (
    "id", "gender", "age", "hypertension", "heart_disease", "ever_married",
    "work_type", "Residence_type", "avg_glucose_level", "bmi", "smoking_status", "stroke",
)
LABEL_COLUMN = "stroke"
MISSING_LEXEMES = ("", "N/A")
SMOKING_ORDER = ("Unknown", "never smoked", "formerly smoked", "smokes")


@dataclass
class RawTable:
    """Column-major table; ``None`` marks a missing cell."""

    columns: list[str]
    data: dict[str, list[Any]]

    def __post_init__(self):
        lengths = {len(self.data[c]) for c in self.columns}
        if len(lengths) > 1:
            raise DataError("columns have different lengths")

    @property
    def n_rows(self) -> int:
        return len(self.data[self.columns[0]]) if self.columns else 0

    @property
    def rows(self) -> list[dict[str, Any]]:
        return [{c: self.data[c][i] for c in self.columns} for i in range(self.n_rows)]

    def column(self, name: str) -> list[Any]:
        if name not in self.data:
            raise DataError(f"unknown column {name!r}")
        return self.data[name]

    def take(self, keep: Sequence[int]) -> "RawTable":
        return RawTable(list(self.columns), {c: [self.data[c][i] for i in keep] for c in self.columns})

    def missing_count(self, name: str) -> int:
        return sum(v is None for v in self.column(name))


@dataclass
class CleaningRules:
    drop_columns: tuple[str, ...] = ("id",)
    bmi_max: float = 60.0
    age_min: float = 25.0
    drop_gender_values: tuple[str, ...] = ("Other",)
    drop_duplicates: bool = True
    bmi_column: str = "bmi"
    age_column: str = "age"
    gender_column: str = "gender"

    def __post_init__(self):
        if not self.bmi_max > 0:
            raise DataError("bmi_max must be positive")
        if not self.age_min >= 0:
            raise DataError("age_min must be non-negative")


@dataclass
class ImputationSpec:
    strategy: str = "mean"  # "mean" | "regression"
    target_column: str = "bmi"

    def __post_init__(self):
        if self.strategy not in ("mean", "regression"):
            raise DataError(f"unknown imputation strategy {self.strategy!r}")


@dataclass
class EncodingSpec:
    """Per-column categorical scheme.

    Values are ``"label"``, ``"onehot"``, ``"binary"`` or a tuple
    ``("ordinal", [v0, v1, ...])``. Columns without an entry that hold two
    observed categories are encoded as binary; other text columns get label
    codes.
    """

    columns: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def default(cls, work_type: str = "label") -> "EncodingSpec":
        if work_type not in ("label", "onehot"):
            raise DataError(f"work_type encoding must be label or onehot, got {work_type!r}")
        return cls({
            "gender": "binary",
            "ever_married": "binary",
            "Residence_type": "binary",
            "work_type": work_type,
            "smoking_status": ("ordinal", list(SMOKING_ORDER)),
        })


@dataclass
class Dataset:
    X: np.ndarray
    y: np.ndarray
    feature_names: tuple[str, ...]
    standardization_stats: tuple[np.ndarray, np.ndarray] | None = None
    encoding: dict[str, Any] = field(default_factory=dict)
    groups: dict[str, tuple[str, ...]] = field(default_factory=dict)
    row_ids: np.ndarray | None = None

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        self.y = np.asarray(self.y).astype(np.int64)
        self.feature_names = tuple(self.feature_names)
        if self.X.ndim != 2:
            raise DataError("X must be a 2-D matrix")
        if self.X.shape[0] != self.y.shape[0]:
            raise DataError(f"X has {self.X.shape[0]} rows but y has {self.y.shape[0]}")
        if len(self.feature_names) != self.X.shape[1]:
            raise DataError("feature_names length does not match X columns")
        if not np.all(np.isfinite(self.X)):
            raise DataError("X contains missing or non-finite entries")
        if self.y.size and not np.isin(self.y, (0, 1)).all():
            raise DataError("labels must be 0/1")
        if self.row_ids is None:
            self.row_ids = np.arange(self.X.shape[0])
        else:
            self.row_ids = np.asarray(self.row_ids, dtype=np.int64)

    def __len__(self) -> int:
        return self.X.shape[0]

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    def class_counts(self) -> tuple[int, int]:
        pos = int(self.y.sum())
        return len(self.y) - pos, pos

    def imbalance_ratio(self) -> float:
        neg, pos = self.class_counts()
        return neg / pos if pos else math.inf

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx)
        return replace(self, X=self.X[idx], y=self.y[idx], row_ids=self.row_ids[idx])

    def with_rows(self, X, y, row_ids=None) -> "Dataset":
        return replace(self, X=X, y=y, row_ids=row_ids)

    def feature_index(self, name: str) -> int:
        try:
            return self.feature_names.index(name)
        except ValueError:
            raise DataError(f"unknown feature {name!r}") from None


# ---------------------------------------------------------------- loading

def _parse_cell(text: str, missing: Sequence[str]):
    text = text.strip()
    if text in missing:
        return None
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def load_csv(path, missing: Sequence[str] = MISSING_LEXEMES,
             aliases: dict[str, str] | None = None,
             required: Sequence[str] = REQUIRED_COLUMNS) -> RawTable:
    """Read a header-first CSV into a :class:`RawTable`.

    ``aliases`` maps alternative header spellings onto canonical names.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"input file not found: {path}")
    aliases = aliases or {}
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        header = [aliases.get(h.strip(), h.strip()) for h in header]
        absent = [c for c in required if c not in header]
        if absent:
            raise DataError(f"{path}: header lacks required column(s) {absent}")
        data: dict[str, list[Any]] = {c: [] for c in header}
        for row in reader:
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(
                    f"{path}: line {reader.line_num}: expected {len(header)} fields, got {len(row)}")
            for c, cell in zip(header, row):
                data[c].append(_parse_cell(cell, missing))
    table = RawTable(header, data)
    if table.n_rows == 0:
        raise DataError(f"{path}: no data rows")
    return table


# --------------------------------------------------------------- cleaning

def clean(raw: RawTable, rules: CleaningRules | None = None) -> RawTable:
    """Drop id columns, outlier rows and exact duplicates; row order is preserved."""
    rules = rules or CleaningRules()
    for c in (rules.bmi_column, rules.age_column, rules.gender_column):
        raw.column(c)
    # a second pass over already-cleaned data must be a no-op
    for c in rules.drop_columns:
        if c not in raw.columns and c not in REQUIRED_COLUMNS:
            raise DataError(f"cleaning rule references unknown column {c!r}")
    cols = [c for c in raw.columns if c not in rules.drop_columns]
    bmi, age, gender = raw.data[rules.bmi_column], raw.data[rules.age_column], raw.data[rules.gender_column]
    drop_gender = set(rules.drop_gender_values)
    keep, seen = [], set()
    for i in range(raw.n_rows):
        if bmi[i] is not None and bmi[i] > rules.bmi_max:
            continue
        if age[i] is not None and age[i] < rules.age_min:
            continue
        if gender[i] in drop_gender:
            continue
        if rules.drop_duplicates:
            key = tuple(raw.data[c][i] for c in cols)
            if key in seen:
                continue
            seen.add(key)
        keep.append(i)
    return RawTable(cols, {c: [raw.data[c][i] for i in keep] for c in cols})


# --------------------------------------------------------------- encoding

def _categories(values) -> list:
    out, seen = [], set()
    for v in values:
        if v not in seen:
            seen.add(v)
            out.append(v)
    return out


def _binary_map(cats: list) -> dict:
    if len(cats) > 2:
        raise DataError(f"non-binary column mapped as binary: categories {cats}")
    lowered = {str(c).lower(): c for c in cats}
    if set(lowered) <= {"yes", "no"}:
        return {lowered[k]: int(k == "yes") for k in lowered}
    if all(isinstance(c, (int, float)) for c in cats) and set(cats) <= {0, 1}:
        return {c: int(c) for c in cats}
    return {c: i for i, c in enumerate(cats)}


def _is_numeric(values) -> bool:
    return all(v is None or (isinstance(v, (int, float)) and not isinstance(v, bool)) for v in values)


def _encode_columns(raw: RawTable, spec: EncodingSpec, exclude: Sequence[str] = (),
                    drop_reference: bool = False):
    """Numeric columns for every table column outside ``exclude``.

    Returns ``(names, blocks, meta, groups)``. Missing cells of numeric
    columns stay NaN. ``drop_reference`` omits the first one-hot category,
    giving a full-rank design when an intercept is added.
    """
    names, blocks, meta, groups = [], [], {}, {}
    for col in raw.columns:
        if col in exclude:
            continue
        values = raw.data[col]
        choice = spec.columns.get(col)
        if choice is None and _is_numeric(values):
            names.append(col)
            blocks.append(np.array([np.nan if v is None else float(v) for v in values]))
            meta[col] = "numeric"
            continue
        if any(v is None for v in values):
            raise DataError(f"column {col!r} has missing cells; impute before encoding")
        cats = _categories(values)
        if choice is None:
            choice = "binary" if len(cats) <= 2 else "label"
        if choice == "binary":
            mapping = _binary_map(cats)
            names.append(col)
            blocks.append(np.array([mapping[v] for v in values], dtype=float))
            meta[col] = {"scheme": "binary", "mapping": {str(k): v for k, v in mapping.items()}}
        elif choice == "label":
            mapping = {c: i for i, c in enumerate(cats)}
            names.append(col)
            blocks.append(np.array([mapping[v] for v in values], dtype=float))
            meta[col] = {"scheme": "label", "categories": [str(c) for c in cats]}
        elif choice == "onehot":
            kept = cats[1:] if drop_reference else cats
            group = []
            for c in kept:
                name = f"{col}_{c}"
                names.append(name)
                group.append(name)
                blocks.append(np.array([float(v == c) for v in values]))
            groups[col] = tuple(group)
            meta[col] = {"scheme": "onehot", "categories": [str(c) for c in cats]}
        elif isinstance(choice, (tuple, list)) and choice and choice[0] == "ordinal":
            order = list(choice[1])
            if len(set(order)) != len(order):
                raise DataError(f"ordinal order for {col!r} repeats a value")
            unknown = [c for c in cats if c not in order]
            if unknown:
                raise DataError(f"ordinal spec for {col!r} misses observed categories {unknown}")
            rank = {c: i for i, c in enumerate(order)}
            names.append(col)
            blocks.append(np.array([rank[v] for v in values], dtype=float))
            meta[col] = {"scheme": "ordinal", "order": [str(c) for c in order]}
        else:
            raise DataError(f"unknown encoding {choice!r} for column {col!r}")
    return names, blocks, meta, groups


def encode(raw: RawTable, spec: EncodingSpec | None = None, label: str = LABEL_COLUMN) -> Dataset:
    """Turn a complete table into a numeric :class:`Dataset`."""
    spec = spec or EncodingSpec.default()
    for col in raw.columns:
        if raw.missing_count(col):
            raise DataError(f"column {col!r} still has missing cells")
    names, blocks, meta, groups = _encode_columns(raw, spec, exclude=(label,))
    y_raw = raw.column(label)
    if not set(y_raw) <= {0, 1}:
        raise DataError(f"label column {label!r} must hold 0/1")
    X = np.column_stack(blocks) if blocks else np.empty((raw.n_rows, 0))
    return Dataset(X, np.array(y_raw, dtype=np.int64), tuple(names), encoding=meta, groups=groups)


def decode_label(ds: Dataset, feature: str, codes) -> list[str]:
    """Inverse of label encoding for one feature."""
    info = ds.encoding.get(feature)
    if not isinstance(info, dict) or info.get("scheme") != "label":
        raise DataError(f"{feature!r} is not label-encoded")
    cats = info["categories"]
    return [cats[int(c)] for c in codes]


# -------------------------------------------------------------- imputation

def _solve_least_squares(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    gram = A.T @ A
    rhs = A.T @ b
    if np.linalg.cond(gram) < 1e12:
        try:
            return np.linalg.solve(gram, rhs)
        except np.linalg.LinAlgError:
            pass
    warnings.warn("singular normal equations; using ridge penalty 1e-8", RuntimeWarning, stacklevel=3)
    return np.linalg.solve(gram + 1e-8 * np.eye(gram.shape[0]), rhs)


def impute(raw: RawTable, spec: ImputationSpec | None = None,
           encoding: EncodingSpec | None = None, label: str = LABEL_COLUMN) -> RawTable:
    """Fill missing cells of the target column.

    Regression imputation fits OLS with an intercept on the rows where the
    target is present, using every other column (encoded per ``encoding``)
    except the label.
    """
    spec = spec or ImputationSpec()
    target = spec.target_column
    values = raw.column(target)
    if not _is_numeric(values):
        raise DataError(f"imputation target {target!r} is not numeric")
    for col in raw.columns:
        if col != target and raw.missing_count(col):
            raise DataError(f"column {col!r} has missing cells; only {target!r} may be imputed")
    missing = np.array([v is None for v in values])
    if missing.all():
        raise DataError(f"every cell of {target!r} is missing")
    if not missing.any():
        return RawTable(list(raw.columns), {c: list(v) for c, v in raw.data.items()})
    present = np.array([np.nan if v is None else float(v) for v in values])
    if spec.strategy == "mean":
        filled = np.where(missing, present[~missing].mean(), present)
    else:
        _, blocks, _, _ = _encode_columns(raw, encoding or EncodingSpec.default(),
                                          exclude=(target, label), drop_reference=True)
        A = np.column_stack([np.ones(raw.n_rows)] + blocks)
        coef = _solve_least_squares(A[~missing], present[~missing])
        filled = np.where(missing, A @ coef, present)
    data = {c: list(v) for c, v in raw.data.items()}
    data[target] = [float(v) for v in filled]
    return RawTable(list(raw.columns), data)


# --------------------------------------------------------- standardization

def standardize(train: Dataset, others: Sequence[Dataset] = ()) -> tuple[Dataset, list[Dataset]]:
    """Z-score every feature with statistics from ``train`` only."""
    if len(train) == 0:
        raise DataError("cannot standardize an empty training set")
    mean = train.X.mean(axis=0)
    std = train.X.std(axis=0)
    flat = std <= 1e-12
    if flat.any():
        names = [n for n, f in zip(train.feature_names, flat) if f]
        warnings.warn(f"zero-variance feature(s) {names}; stddev treated as 1", RuntimeWarning, stacklevel=2)
        std = np.where(flat, 1.0, std)
    stats = (mean, std)

    def apply(ds: Dataset) -> Dataset:
        if ds.n_features != train.n_features:
            raise DataError("feature count differs from the training set")
        return replace(ds, X=(ds.X - mean) / std, standardization_stats=stats)

    return apply(train), [apply(o) for o in others]


# ----------------------------------------------------------------- split

def stratified_indices(y: np.ndarray, test_fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    if not 0 < test_fraction < 1:
        raise DataError("test_fraction must lie strictly between 0 and 1")
    rng = np.random.default_rng(seed)
    test = []
    for cls in (0, 1):
        members = np.flatnonzero(y == cls)
        if len(members) < 2:
            raise DataError(f"class {cls} has {len(members)} member(s); need at least 2 to split")
        n_test = int(round(len(members) * test_fraction))
        n_test = min(max(n_test, 1), len(members) - 1)
        test.append(rng.permutation(members)[:n_test])
    test_idx = np.sort(np.concatenate(test))
    train_idx = np.setdiff1d(np.arange(len(y)), test_idx)
    return train_idx, test_idx


def split(ds: Dataset, test_fraction: float = 0.2, seed: int = 0) -> tuple[Dataset, Dataset]:
    """Stratified, seeded train/test partition."""
    train_idx, test_idx = stratified_indices(ds.y, test_fraction, seed)
    return ds.subset(train_idx), ds.subset(test_idx)


# ----------------------------------------------------------------- export

def export_dataset(ds: Dataset, csv_path, sidecar_path=None) -> tuple[Path, Path]:
    """Write the dataset as CSV plus a JSON sidecar of its metadata."""
    csv_path = Path(csv_path)
    sidecar_path = Path(sidecar_path) if sidecar_path else csv_path.with_suffix(".json")
    with csv_path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(list(ds.feature_names) + [LABEL_COLUMN])
        for row, label in zip(ds.X, ds.y):
            w.writerow([repr(float(v)) for v in row] + [int(label)])
    meta = {
        "feature_names": list(ds.feature_names),
        "encoding": ds.encoding,
        "groups": {k: list(v) for k, v in ds.groups.items()},
        "standardization": None if ds.standardization_stats is None else {
            "mean": ds.standardization_stats[0].tolist(),
            "std": ds.standardization_stats[1].tolist(),
        },
        "n_rows": len(ds),
        "class_counts": list(ds.class_counts()),
    }
    sidecar_path.write_text(json.dumps(meta, indent=2))
    return csv_path, sidecar_path


def load_dataset(csv_path, sidecar_path=None) -> Dataset:
    """Read back a snapshot written by :func:`export_dataset`."""
    csv_path = Path(csv_path)
    sidecar_path = Path(sidecar_path) if sidecar_path else csv_path.with_suffix(".json")
    meta = json.loads(sidecar_path.read_text())
    arr = np.loadtxt(csv_path, delimiter=",", skiprows=1, ndmin=2)
    stats = meta.get("standardization")
    return Dataset(
        arr[:, :-1], arr[:, -1].astype(np.int64), tuple(meta["feature_names"]),
        standardization_stats=None if stats is None else (np.array(stats["mean"]), np.array(stats["std"])),
        encoding=meta.get("encoding", {}),
        groups={k: tuple(v) for k, v in meta.get("groups", {}).items()},
    )


def prepare(path, imputation: str = "regression", encoding: str = "onehot",
            rules: CleaningRules | None = None) -> Dataset:
    """load → clean → impute → encode, leaving standardization to the caller."""
    enc = EncodingSpec.default(encoding)
    raw = clean(load_csv(path), rules)
    raw = impute(raw, ImputationSpec(imputation), encoding=enc)
    return encode(raw, enc)

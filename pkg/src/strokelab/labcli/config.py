"""Experiment configuration and flat key/value config files."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

from ..errors import ConfigError
from ..shallow.specs import ClassifierSpec, DISPLAY_NAMES, table3_specs

TECHNIQUES = (
    "baseline", "smote", "voting", "smote_voting",
    "dnn", "dnn_focal", "smote_dnn_focal", "pcakmeans_dnn_focal",
)
NEURAL = ("dnn", "dnn_focal", "smote_dnn_focal", "pcakmeans_dnn_focal")
SHALLOW = ("baseline", "smote")
KIND_BY_NAME = {v.lower(): k for k, v in DISPLAY_NAMES.items()} | {k: k for k in DISPLAY_NAMES}


@dataclass
class ExperimentConfig:
    input: str = ""
    imputation: str = "regression"
    encoding: str = "onehot"
    technique: str = "baseline"
    classifiers: list[str] = field(default_factory=lambda: [s.name for s in table3_specs()])
    epochs: list[int] = field(default_factory=lambda: [50, 100, 200])
    seeds: list[int] = field(default_factory=lambda: [7, 17, 42])
    test_fraction: float = 0.2
    threshold: float = 0.5
    dnn_threshold: float = 0.25
    gamma: float = 2.0
    hidden: list[int] = field(default_factory=lambda: [64, 128, 256])
    step: float = 1e-3
    momentum: float = 0.9
    batch_size: int = 32
    cluster_step: float = 1e-2
    smote_k: int = 5
    voting_weighting: str = "f1"
    n_components: int = 7
    n_clusters: int = 5
    ks_schedule: list[int] = field(default_factory=lambda: [3, 5, 7, 9, 11])
    pcakmeans_protocol: str = "combined"   # "combined" | "leakage_free"
    out: str = "runs"
    formats: list[str] = field(default_factory=lambda: ["json", "markdown", "csv"])

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.technique not in TECHNIQUES:
            raise ConfigError(f"unknown technique {self.technique!r}; choose from {TECHNIQUES}")
        if self.imputation not in ("mean", "regression"):
            raise ConfigError("imputation must be mean or regression")
        if self.encoding not in ("label", "onehot"):
            raise ConfigError("encoding must be label or onehot")
        if self.technique in NEURAL and not self.epochs:
            raise ConfigError("neural techniques need at least one epoch count")
        if any(e < 1 for e in self.epochs):
            raise ConfigError("epoch counts must be positive")
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        if not 0 < self.test_fraction < 1:
            raise ConfigError("test_fraction must lie in (0, 1)")
        for t in (self.threshold, self.dnn_threshold):
            if not 0 < t < 1:
                raise ConfigError("thresholds must lie in (0, 1)")
        if self.gamma < 0:
            raise ConfigError("gamma must be >= 0")
        if self.pcakmeans_protocol not in ("combined", "leakage_free"):
            raise ConfigError("pcakmeans_protocol must be combined or leakage_free")
        if self.voting_weighting not in ("uniform", "f1", "auc"):
            raise ConfigError("voting_weighting must be uniform, f1 or auc")
        if len(self.ks_schedule) != self.n_clusters:
            raise ConfigError("ks_schedule needs one entry per cluster")
        bad = [f for f in self.formats if f not in ("json", "markdown", "csv")]
        if bad:
            raise ConfigError(f"unknown output format(s) {bad}")
        if self.technique in SHALLOW + ("voting", "smote_voting"):
            self.classifier_specs(0)
            if self.technique in ("voting", "smote_voting") and len(self.classifiers) < 2:
                raise ConfigError("voting needs at least two classifiers")

    def classifier_specs(self, seed: int) -> list[ClassifierSpec]:
        tuned = {s.kind: s for s in table3_specs(seed)}
        out = []
        for name in self.classifiers:
            kind = KIND_BY_NAME.get(name.lower())
            if kind is None:
                if name.lower() in ("xgb", "xgboost"):
                    raise ConfigError("XGB is out of scope and not implemented")
                raise ConfigError(f"unknown classifier {name!r}")
            out.append(tuned[kind])
        return out

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config key(s) {sorted(unknown)}")
        return cls(**d)


def _coerce(name: str, raw: Any) -> Any:
    kinds = {f.name: f for f in fields(ExperimentConfig)}
    if name not in kinds:
        raise ConfigError(f"unknown config key {name!r}")
    default = getattr(ExperimentConfig(), name)
    if not isinstance(raw, str):
        return raw
    raw = raw.strip()
    try:
        if isinstance(default, list):
            items = [s.strip() for s in raw.split(",") if s.strip()]
            if default and isinstance(default[0], int):
                return [int(s) for s in items]
            return items
        if isinstance(default, bool):
            return raw.lower() in ("1", "true", "yes", "on")
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
    except ValueError:
        raise ConfigError(f"bad value for {name}: {raw!r}") from None
    return raw


def read_config_file(path) -> dict:
    """Flat ``key = value`` (or ``key: value``) lines, or a JSON object."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    text = path.read_text()
    if path.suffix == ".json":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: {e}") from None
        return {k: _coerce(k, v) for k, v in d.items()}
    out = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        sep = "=" if "=" in line else ":" if ":" in line else None
        if sep is None:
            raise ConfigError(f"{path}:{n}: expected key = value")
        k, v = line.split(sep, 1)
        k = k.strip().replace("-", "_")
        out[k] = _coerce(k, v)
    return out


def build_config(file_values: dict | None = None, **overrides) -> ExperimentConfig:
    """Defaults, then file values, then explicit overrides (``None`` means unset)."""
    d = dict(file_values or {})
    d.update({k: _coerce(k, v) for k, v in overrides.items() if v is not None})
    return ExperimentConfig.from_dict(d)

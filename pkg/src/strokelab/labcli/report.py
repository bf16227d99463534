"""Experiment report model and its JSON, markdown and CSV renderings."""
from __future__ import annotations

import csv
import io
import json
import statistics
from dataclasses import asdict, dataclass, field
from pathlib import Path

from ..errors import DataError
from ..shallow.specs import DISPLAY_NAMES

REPORT_FORMAT = "strokelab.report/1"
ROW_COLUMNS = (
    "technique", "classifier", "seed", "epochs", "imputation", "encoding", "status",
    "accuracy", "precision", "recall", "f1", "auc", "auc_score", "tp", "fp", "tn", "fn",
    "error", "params",
)
HISTORY_COLUMNS = ("technique", "seed", "epoch", "loss", "f1", "auc", "auc_score", "accuracy")
XGB_CELL = "n/a (out of scope)"
CLASSICAL_ORDER = [DISPLAY_NAMES[k] for k in
                   ("logistic", "sgd", "tree", "adaboost", "gaussian_nb", "qda", "mlp", "knn", "gbc")]


@dataclass
class ExperimentReport:
    kind: str                       # "run" | "sweep"
    config: dict
    rows: list[dict]
    histories: list[dict] = field(default_factory=list)
    caveats: list[str] = field(default_factory=list)
    environment: dict = field(default_factory=dict)
    generated_at: str = ""

    @property
    def failures(self) -> list[dict]:
        return [r for r in self.rows if r["status"] != "ok"]

    def to_dict(self) -> dict:
        return {"format": REPORT_FORMAT, **asdict(self)}

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentReport":
        if d.get("format") != REPORT_FORMAT:
            raise DataError(f"unsupported report format {d.get('format')!r}")
        return cls(d["kind"], d["config"], d["rows"], d.get("histories", []), d.get("caveats", []),
                   d.get("environment", {}), d.get("generated_at", ""))

    def summary(self) -> list[dict]:
        """Mean metrics per (technique, classifier, epochs) over the successful seeds."""
        groups: dict[tuple, list[dict]] = {}
        for r in self.rows:
            groups.setdefault((r["technique"], r["classifier"], r["epochs"]), []).append(r)
        out = []
        for (tech, clf, ep), rs in groups.items():
            ok = [r for r in rs if r["status"] == "ok"]
            entry = {"technique": tech, "classifier": clf, "epochs": ep,
                     "seeds": [r["seed"] for r in ok], "failed": len(rs) - len(ok)}
            for m in ("f1", "auc", "accuracy", "auc_score"):
                vals = [r[m] for r in ok]
                entry[m] = statistics.fmean(vals) if vals else None
                entry[f"{m}_sd"] = statistics.pstdev(vals) if len(vals) > 1 else (0.0 if vals else None)
            out.append(entry)
        return out


def to_json(report: ExperimentReport) -> str:
    return json.dumps(report.to_dict(), indent=2) + "\n"


def from_json(text: str) -> ExperimentReport:
    try:
        return ExperimentReport.from_dict(json.loads(text))
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise DataError(f"malformed report: {exc}") from None


def load_report(path) -> ExperimentReport:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"report not found: {path}")
    return from_json(path.read_text())


def canonical_json(report: ExperimentReport) -> str:
    """JSON without the generation timestamp, for reproducibility checks."""
    d = report.to_dict()
    d.pop("generated_at")
    return json.dumps(d, indent=2)


# --------------------------------------------------------------- CSV

def _cell(v):
    if v is None:
        return ""
    if isinstance(v, dict):
        return json.dumps(v, sort_keys=True)
    if isinstance(v, float):
        return repr(v)
    return v


def to_csv(report: ExperimentReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ROW_COLUMNS)
    for r in report.rows:
        w.writerow([_cell(r.get(c)) for c in ROW_COLUMNS])
    return buf.getvalue()


def history_csv(report: ExperimentReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HISTORY_COLUMNS)
    for h in report.histories:
        w.writerow([_cell(h.get(c)) for c in HISTORY_COLUMNS])
    return buf.getvalue()


# ---------------------------------------------------------- markdown

def _num(v) -> str:
    return "failed" if v is None else f"{v:.3f}"


def _metric_cells(entry) -> list[str]:
    if entry is None:
        return ["", "", ""]
    return [_num(entry["f1"]), _num(entry["auc"]), _num(entry["accuracy"])]


def _table(header, rows) -> list[str]:
    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    lines += ["| " + " | ".join(str(c) for c in r) + " |" for r in rows]
    return lines


def _classical_tables(by_key) -> list[str]:
    out = []
    for tech, vote_tech, title in (("baseline", "voting", "Without resampling"),
                                   ("smote", "smote_voting", "With SMOTE")):
        rows = [[name, *_metric_cells(by_key.get((tech, name, None)))] for name in CLASSICAL_ORDER]
        rows.append(["XGB", XGB_CELL, XGB_CELL, XGB_CELL])
        rows.append(["Weighted Voting", *_metric_cells(by_key.get((vote_tech, "Weighted Voting", None)))])
        out += [f"### {title}", "", *_table(["Classifier", "F1", "AUC", "Accuracy"], rows), ""]
    return out


def to_markdown(report: ExperimentReport) -> str:
    summary = report.summary()
    seeds = sorted({s for e in summary for s in e["seeds"]})
    lines = ["# Experiment report", ""]
    if report.kind == "sweep":
        by_key = {(e["technique"], e["classifier"], e["epochs"]): e for e in summary}
        lines += ["## Classical classifiers", ""] + _classical_tables(by_key)
        neural = [e for e in summary if e["epochs"] is not None]
        if neural:
            rows = [[e["classifier"], e["epochs"], *_metric_cells(e)] for e in neural]
            lines += ["## Neural network", "", *_table(["Model", "Epochs", "F1", "AUC", "Accuracy"], rows), ""]
    else:
        rows = [[e["technique"], e["classifier"], "" if e["epochs"] is None else e["epochs"], *_metric_cells(e)]
                for e in summary]
        lines += _table(["Technique", "Classifier", "Epochs", "F1", "AUC", "Accuracy"], rows) + [""]
    notes = [f"Values are means over seeds: {', '.join(map(str, seeds))}." if seeds else "No successful runs."]
    notes += report.caveats
    for r in report.failures:
        ep = "" if r["epochs"] is None else f", {r['epochs']} epochs"
        notes.append(f"Failed: {r['technique']} / {r['classifier']} (seed {r['seed']}{ep}): {r['error']}")
    lines += ["Notes:", ""] + [f"{i}. {n}" for i, n in enumerate(notes, 1)]
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------ emission

def emit_report(report: ExperimentReport, out_dir, formats=("json", "markdown", "csv"),
                stem: str = "report") -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for fmt in formats:
        if fmt == "json":
            p = out_dir / f"{stem}.json"
            p.write_text(to_json(report))
        elif fmt == "markdown":
            p = out_dir / f"{stem}.md"
            p.write_text(to_markdown(report))
        elif fmt == "csv":
            p = out_dir / f"{stem}.csv"
            p.write_text(to_csv(report))
            if report.histories:
                h = out_dir / f"{stem}_history.csv"
                h.write_text(history_csv(report))
                written.append(h)
        else:
            raise ValueError(f"unknown format {fmt!r}")
        written.append(p)
    return written

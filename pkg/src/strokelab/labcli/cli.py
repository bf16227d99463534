"""Command-line entry point: ingest, profile, run, sweep, report."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from ..errors import ConfigError, DataError
from ..ingest import export_dataset, standardize
from ..profile import correlation_matrix, profile as profile_dataset, tree_importance, vif, vif_markdown
from ..resample import (ClusterUndersampleConfig, cluster_undersample, elbow_point, elbow_scan,
                        export_batches, pca_fit, pca_transform, write_elbow)
from .config import TECHNIQUES, build_config, read_config_file
from .experiment import SWEEP_TECHNIQUES, load_prepared, run_experiment, run_sweep
from .report import emit_report, load_report

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_RUNTIME = 0, 1, 2, 3
log = logging.getLogger("strokelab")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _csv_list(text: str) -> list[str]:
    return [s.strip() for s in text.split(",") if s.strip()]


def _add_data_flags(p):
    p.add_argument("--config", help="flat key = value file; flags override it")
    p.add_argument("--input", help="stroke CSV")
    p.add_argument("--imputation", choices=("mean", "regression"))
    p.add_argument("--encoding", choices=("label", "onehot"))
    p.add_argument("--out", help="output directory")


def _add_run_flags(p):
    p.add_argument("--technique", help=f"one of {', '.join(TECHNIQUES)}")
    p.add_argument("--classifiers", help="comma list of classifier names")
    p.add_argument("--epochs", help="comma list, e.g. 50,100,200")
    p.add_argument("--gamma", type=float)
    p.add_argument("--seed", help="comma list of seeds")
    p.add_argument("--format", help="comma list of json, markdown, csv")
    p.add_argument("--pcakmeans-protocol", choices=("combined", "leakage_free"))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="strokelab", description="Stroke prediction imbalance experiments.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    _add_data_flags(sub.add_parser("ingest", help="clean, impute and encode; export CSV + JSON sidecar"))
    p = sub.add_parser("profile", help="correlation, VIF, importances, PCA and elbow curves")
    _add_data_flags(p)
    p.add_argument("--seed", help="k-means seed")
    for name, helptext in (("run", "one technique over all seeds"), ("sweep", "every technique")):
        p = sub.add_parser(name, help=helptext)
        _add_data_flags(p)
        _add_run_flags(p)
    p = sub.add_parser("report", help="re-render a JSON report")
    p.add_argument("--input", required=True, help="report JSON")
    p.add_argument("--out", help="output directory")
    p.add_argument("--format", help="comma list of json, markdown, csv")
    return parser


def _config(args, with_technique: bool = True):
    file_values = read_config_file(args.config) if getattr(args, "config", None) else {}
    if not with_technique:
        file_values.pop("technique", None)
    overrides = {
        "input": args.input, "imputation": args.imputation, "encoding": args.encoding, "out": args.out,
    }
    for flag, key in (("technique", "technique"), ("classifiers", "classifiers"), ("epochs", "epochs"),
                      ("gamma", "gamma"), ("seed", "seeds"), ("format", "formats"),
                      ("pcakmeans_protocol", "pcakmeans_protocol")):
        overrides[key] = getattr(args, flag, None)
    if not with_technique:
        overrides["technique"] = None
    cfg = build_config(file_values, **overrides)
    if not cfg.input:
        raise ConfigError("--input is required")
    return cfg


def _cmd_ingest(args) -> int:
    cfg = _config(args)
    ds = load_prepared(cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    csv_path, meta = export_dataset(ds, out / f"dataset_{cfg.imputation}_{cfg.encoding}.csv")
    neg, pos = ds.class_counts()
    print(f"{len(ds)} rows ({pos} positive, {neg} negative), {ds.n_features} features")
    print(csv_path)
    print(meta)
    return EXIT_OK


def _cmd_profile(args) -> int:
    cfg = _config(args)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    seed = cfg.seeds[0]
    label_ds = load_prepared(build_config(input=cfg.input, imputation=cfg.imputation, encoding="label"))
    onehot_ds = load_prepared(build_config(input=cfg.input, imputation=cfg.imputation, encoding="onehot"))
    label_vif = vif(label_ds, include_label=True)
    onehot_vif = vif(onehot_ds, include_label=True, groups=onehot_ds.groups)
    ds = label_ds if cfg.encoding == "label" else onehot_ds
    rep = profile_dataset(ds)
    names, R, _ = correlation_matrix(ds)
    with (out / "correlation.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([""] + names)
        for n, row in zip(names, R):
            w.writerow([n] + [repr(float(v)) for v in row])
    std, _ = standardize(ds)
    pca_full = pca_fit(std.X, std.n_features)
    with (out / "explained_variance.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["component", "ratio", "cumulative"])
        for i, (r, c) in enumerate(zip(pca_full.explained_variance_ratio, pca_full.cumulative_ratio), 1):
            w.writerow([i, repr(float(r)), repr(float(c))])
    cu = ClusterUndersampleConfig(seed=seed)
    Z = pca_transform(pca_fit(std.X, cu.n_components), std.X)
    curve = elbow_scan(Z, range(1, 11), seed=seed)
    write_elbow(curve, out / "elbow.csv")
    importance = tree_importance(ds)
    summary = {
        "rows": len(ds), "class_counts": list(ds.class_counts()),
        "vif_label": label_vif, "vif_onehot": onehot_vif,
        "importance": importance,
        "explained_variance_7": float(pca_full.cumulative_ratio[cu.n_components - 1]),
        "elbow_k": elbow_point(curve),
        "profile": rep.to_dict(),
    }
    (out / "profile.json").write_text(json.dumps(_finite(summary), indent=2))
    md = ["# Feature profile", "", "## Variance inflation factors", "",
          vif_markdown(label_vif, onehot_vif, onehot_ds.groups), "## Tree importances", "",
          "| Feature | Importance |", "|---|---|"]
    md += [f"| {k} | {v:.4f} |" for k, v in sorted(importance.items(), key=lambda kv: kv[1])]
    (out / "profile.md").write_text("\n".join(md) + "\n")
    print(f"profile written to {out}")
    return EXIT_OK


def _finite(v):
    """JSON-safe copy: non-finite floats become null."""
    if isinstance(v, dict):
        return {k: _finite(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_finite(x) for x in v]
    if isinstance(v, float) and not np.isfinite(v):
        return None
    return v


def _finish(report, cfg) -> int:
    paths = emit_report(report, cfg.out, cfg.formats)
    for p in paths:
        print(p)
    if report.failures:
        log.error("%d configuration(s) failed", len(report.failures))
        return EXIT_RUNTIME
    return EXIT_OK


def _cmd_run(args) -> int:
    cfg = _config(args)
    report = run_experiment(cfg)
    if cfg.technique == "pcakmeans_dnn_focal":
        ds, _ = standardize(load_prepared(cfg))
        res = cluster_undersample(ds, ClusterUndersampleConfig(cfg.n_components, cfg.n_clusters,
                                                               tuple(cfg.ks_schedule), seed=cfg.seeds[0]))
        print(export_batches(res, Path(cfg.out) / "batches"))
    return _finish(report, cfg)


def _cmd_sweep(args) -> int:
    cfg = _config(args, with_technique=False)
    techniques = _csv_list(args.technique) if args.technique else list(SWEEP_TECHNIQUES)
    bad = [t for t in techniques if t not in TECHNIQUES]
    if bad:
        raise ConfigError(f"unknown technique(s) {bad}")
    return _finish(run_sweep(cfg, techniques), cfg)


def _cmd_report(args) -> int:
    report = load_report(args.input)
    formats = _csv_list(args.format) if args.format else ["markdown"]
    bad = [f for f in formats if f not in ("json", "markdown", "csv")]
    if bad:
        raise ConfigError(f"unknown output format(s) {bad}")
    out = args.out or str(Path(args.input).parent)
    for p in emit_report(report, out, formats, stem=Path(args.input).stem):
        print(p)
    return EXIT_OK


COMMANDS = {"ingest": _cmd_ingest, "profile": _cmd_profile, "run": _cmd_run,
            "sweep": _cmd_sweep, "report": _cmd_report}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(message)s")
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

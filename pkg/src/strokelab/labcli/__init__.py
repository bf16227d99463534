"""Experiment configuration, runner, grid search, reporting and the command-line interface."""
from .config import ExperimentConfig, build_config, read_config_file
from .experiment import run_experiment, run_sweep
from .gridsearch import GridResult, grid_search, stratified_folds
from .report import ExperimentReport, emit_report, from_json, load_report, to_json

__all__ = [
    "ExperimentConfig", "ExperimentReport", "GridResult", "build_config", "emit_report", "from_json",
    "grid_search", "load_report", "read_config_file", "run_experiment", "run_sweep", "stratified_folds",
    "to_json",
]

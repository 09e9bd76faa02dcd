"""Configuration, experiments, CSV reports and the command-line interface."""

from .config import ExperimentConfig, load_config, parse_config_text
from .experiment import (
    Bounds,
    ExperimentReport,
    TrialResult,
    aggregate,
    bounds_for,
    run_experiment,
    run_trial,
    summary_csv,
    trials_csv,
)

__all__ = [
    "Bounds", "ExperimentConfig", "ExperimentReport", "TrialResult", "aggregate", "bounds_for",
    "load_config", "parse_config_text", "run_experiment", "run_trial", "summary_csv", "trials_csv",
]

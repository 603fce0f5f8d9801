"""Experiment harness: expressions, configs, the trial runner and the CLI."""

from .config import ExperimentConfig, build, load_config_file, table_presets
from .expr import UniformRange, evaluate, parse_prob_expr
from .runner import run_experiment, run_trial, tune_c, write_summary

__all__ = [
    "ExperimentConfig",
    "build",
    "load_config_file",
    "table_presets",
    "UniformRange",
    "evaluate",
    "parse_prob_expr",
    "run_experiment",
    "run_trial",
    "tune_c",
    "write_summary",
]

"""Batch experiment harness: configuration, runners, metrics, and the
command-line interface for cross-validating the two solvers."""

from .config import ExperimentConfig, load_config, parse_config
from .experiments import run_experiment
from .metrics import (
    PeriodMetrics,
    TumblingMetrics,
    compare_tumbling,
    tumbling_metrics,
)
from .report import (
    CSV_HEADER,
    ExperimentReport,
    TrajectorySeries,
    read_series_csv,
    read_summary,
    write_series_csv,
    write_summary,
)
from .stats import WINDOW_PRESETS, TerminalStats, terminal_stats

__all__ = [
    "CSV_HEADER",
    "ExperimentConfig",
    "ExperimentReport",
    "PeriodMetrics",
    "TerminalStats",
    "TrajectorySeries",
    "TumblingMetrics",
    "WINDOW_PRESETS",
    "compare_tumbling",
    "load_config",
    "parse_config",
    "read_series_csv",
    "read_summary",
    "run_experiment",
    "terminal_stats",
    "tumbling_metrics",
    "write_series_csv",
    "write_summary",
]

"""Benchmark runner and ablation harness."""

from .ablations import GRID_ORDER, NAMED_CONFIGS, AblationConfig, get_config
from .cases import BenchmarkCase, CaseError, GroundTruth, ground_truth_from_sql, load_cases
from .judge import ASPECTS, JudgeScore, judge, load_rubric
from .metrics import column_recall, select_ground_truth, table_recall
from .runner import CaseResult, MetricsReport, render, run_benchmark

__all__ = [
    "ASPECTS",
    "AblationConfig",
    "BenchmarkCase",
    "CaseError",
    "CaseResult",
    "GRID_ORDER",
    "GroundTruth",
    "JudgeScore",
    "MetricsReport",
    "NAMED_CONFIGS",
    "column_recall",
    "get_config",
    "ground_truth_from_sql",
    "judge",
    "load_cases",
    "load_rubric",
    "render",
    "run_benchmark",
    "select_ground_truth",
    "table_recall",
]

"""Recall metrics against multi-ground-truth cases.

The scoring ground truth is the one with the highest table overlap to the
response; ties prefer the higher resulting table recall, then ground-truth
order. Column recall is computed against that same selected ground truth.
"""

from __future__ import annotations

from typing import Iterable, Sequence

from .cases import GroundTruth


def select_ground_truth(
    ground_truths: Sequence[GroundTruth],
    response_tables: Iterable[str],
) -> GroundTruth:
    if not ground_truths:
        raise ValueError("at least one ground truth is required")
    response = set(response_tables)
    best = None
    best_key: tuple[int, float] | None = None
    for gt in ground_truths:
        if not gt.tables:
            raise ValueError("ground truth with zero tables is a case configuration error")
        overlap = len(gt.tables & response)
        recall = overlap / len(gt.tables)
        key = (overlap, recall)
        if best_key is None or key > best_key:
            best, best_key = gt, key
    return best


def table_recall(
    response_tables: Iterable[str],
    ground_truths: Sequence[GroundTruth],
) -> float:
    response = set(response_tables)
    gt = select_ground_truth(ground_truths, response)
    return len(gt.tables & response) / len(gt.tables)


def column_recall(
    response_tables: Iterable[str],
    response_columns: Iterable[str],
    ground_truths: Sequence[GroundTruth],
) -> float:
    gt = select_ground_truth(ground_truths, set(response_tables))
    if not gt.columns:
        return 1.0  # nothing to recall
    return len(gt.columns & set(response_columns)) / len(gt.columns)

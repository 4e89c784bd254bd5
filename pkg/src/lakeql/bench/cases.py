"""Benchmark cases: questions with one or more ground-truth queries."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from lakeql.sqlanalysis import SqlSyntaxError, extract_refs, parse
from lakeql.sqlanalysis.refs import SchemaProvider


class CaseError(ValueError):
    """Malformed benchmark case."""


@dataclass(frozen=True)
class GroundTruth:
    sql: str
    tables: frozenset[str]
    columns: frozenset[str]


@dataclass(frozen=True)
class BenchmarkCase:
    id: str
    question: str
    user: str
    product_areas: tuple[str, ...]
    ground_truths: tuple[GroundTruth, ...]

    def __post_init__(self):
        if not self.ground_truths:
            raise CaseError(f"{self.id}: at least one ground truth is required")


def ground_truth_from_sql(
    sql: str,
    schema: SchemaProvider,
    default_database: str,
    explicit_tables: tuple[str, ...] | None = None,
) -> GroundTruth:
    """Derive the table/column sets from the ground-truth SQL. Explicit
    tables, when given, override extraction; columns are always derived."""
    try:
        refs = extract_refs(parse(sql), schema, default_database, strict=False)
    except SqlSyntaxError as exc:
        raise CaseError(f"ground truth does not parse: {exc.message}") from exc
    tables = frozenset(explicit_tables) if explicit_tables else frozenset(refs.tables)
    if not tables:
        raise CaseError("ground truth references no tables")
    return GroundTruth(sql=sql, tables=tables, columns=frozenset(refs.columns))


def load_cases(
    path: str | Path,
    schema: SchemaProvider,
    default_database: str = "default",
) -> list[BenchmarkCase]:
    cases: list[BenchmarkCase] = []
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, 1):
            line = line.strip()
            if not line:
                continue
            raw = json.loads(line)
            try:
                gts = tuple(
                    ground_truth_from_sql(
                        gt["sql"],
                        schema,
                        default_database,
                        tuple(t.lower() for t in gt.get("tables", ())) or None,
                    )
                    for gt in raw["ground_truths"]
                )
                cases.append(BenchmarkCase(
                    id=str(raw["id"]),
                    question=str(raw["question"]),
                    user=str(raw["user"]),
                    product_areas=tuple(raw.get("product_areas", ())),
                    ground_truths=gts,
                ))
            except (KeyError, CaseError) as exc:
                raise CaseError(f"{path}:{line_no}: {exc}") from exc
    return cases

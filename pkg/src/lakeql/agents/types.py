"""Structured outputs of the query-writing stages."""

from __future__ import annotations

from dataclasses import dataclass, field

from lakeql.retrieval.context import RetrievedContext
from lakeql.sqlanalysis import ValidationReport

MAX_FIX_ITERATIONS = 2


@dataclass(frozen=True)
class RankedTable:
    table: str
    relevance_score: int | None  # 1-10; None when rankers are disabled
    explanation: str = ""

    def __post_init__(self):
        if self.relevance_score is not None and not 1 <= self.relevance_score <= 10:
            raise ValueError(f"relevance score out of range: {self.relevance_score}")


@dataclass(frozen=True)
class RankedColumns:
    """Two-tier column selection per table; tiers are disjoint."""

    relevant: dict[str, tuple[str, ...]]
    potentially_relevant: dict[str, tuple[str, ...]]

    def all_columns(self, table: str) -> frozenset[str]:
        return frozenset(self.relevant.get(table, ())) | frozenset(
            self.potentially_relevant.get(table, ())
        )

    def tables(self) -> list[str]:
        seen = list(self.relevant)
        seen += [t for t in self.potentially_relevant if t not in seen]
        return seen


@dataclass(frozen=True)
class QueryDraft:
    assumptions: tuple[str, ...]
    sql: str
    explanation: str
    tables: tuple[str, ...]
    columns: tuple[str, ...]

    def __post_init__(self):
        if not self.sql:
            raise ValueError("draft SQL must be non-empty")

    def to_json(self) -> dict:
        return {
            "assumptions": list(self.assumptions),
            "sql": self.sql,
            "explanation": self.explanation,
            "tables": list(self.tables),
            "columns": list(self.columns),
        }


@dataclass(frozen=True)
class ToolCall:
    tool: str
    arguments: dict
    result_digest: str


@dataclass
class ResearchFinding:
    updated_tables: list[str] = field(default_factory=list)
    recommendation: str = ""
    tool_trace: list[ToolCall] = field(default_factory=list)
    reflection_approved: bool = False


@dataclass
class PipelineResult:
    question: str
    draft: QueryDraft | None = None
    validation: ValidationReport | None = None
    context: RetrievedContext | None = None
    ranked_tables: list[RankedTable] = field(default_factory=list)
    ranked_columns: RankedColumns | None = None
    findings: list[ResearchFinding] = field(default_factory=list)
    fix_iterations: int = 0
    failure: str | None = None
    warnings: list[str] = field(default_factory=list)
    counters: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.fix_iterations > MAX_FIX_ITERATIONS:
            raise ValueError("fix loop bound exceeded")

    @property
    def ok(self) -> bool:
        return self.failure is None and self.draft is not None

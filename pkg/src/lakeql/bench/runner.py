"""Benchmark runner: executes every case under a named configuration and
renders the metrics grid (text, CSV, or JSON)."""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field

from lakeql.gateway import ScriptMissError
from lakeql.orchestrator.engine import Engine
from lakeql.sqlanalysis import SqlSyntaxError, extract_refs, parse

from .ablations import AblationConfig
from .cases import BenchmarkCase
from .judge import JudgeScore, judge
from .metrics import column_recall, table_recall

logger = logging.getLogger(__name__)


@dataclass
class CaseResult:
    case_id: str
    table_recall: float = 0.0
    column_recall: float = 0.0
    score: JudgeScore | None = None
    compiled: bool = False
    valid_schema: bool = False
    llm_calls: int = 0
    ebr_queries: int = 0
    db_queries: int = 0
    failure: str | None = None


@dataclass
class MetricsReport:
    config_name: str
    description: str
    cases: list[CaseResult] = field(default_factory=list)

    @property
    def unjudged(self) -> int:
        return sum(1 for c in self.cases if c.score is None and c.failure is None)

    def _mean(self, values: list[float]) -> float:
        return sum(values) / len(values) if values else 0.0

    def aggregate(self) -> dict:
        cases = self.cases
        judged = [c.score.overall for c in cases if c.score is not None]
        distribution = {s: judged.count(s) for s in range(1, 6)}
        return {
            "config": self.config_name,
            "description": self.description,
            "cases": len(cases),
            "table_recall": self._mean([c.table_recall for c in cases]),
            "column_recall": self._mean([c.column_recall for c in cases]),
            "score_pct_4_plus": (
                sum(1 for s in judged if s >= 4) / len(judged) if judged else 0.0
            ),
            "score_distribution": distribution,
            "unjudged": self.unjudged,
            "compilation_rate": self._mean([1.0 if c.compiled else 0.0 for c in cases]),
            "valid_tables_columns_rate": self._mean(
                [1.0 if c.valid_schema else 0.0 for c in cases]
            ),
            "llm_calls": self._mean([float(c.llm_calls) for c in cases]),
            "ebr_queries": self._mean([float(c.ebr_queries) for c in cases]),
            "db_queries": self._mean([float(c.db_queries) for c in cases]),
        }


def response_refs(result, catalog, default_database: str) -> tuple[set[str], set[str]]:
    """Tables/columns of the final draft: extracted from the SQL when it
    parses, else the draft's own claims."""
    if result.draft is None:
        return set(), set()
    try:
        refs = extract_refs(
            parse(result.draft.sql), catalog, default_database, strict=False
        )
        return set(refs.tables), set(refs.columns)
    except SqlSyntaxError:
        return set(result.draft.tables), set(result.draft.columns)


def run_benchmark(
    engine: Engine,
    cases: list[BenchmarkCase],
    ablation: AblationConfig,
    use_judge: bool = True,
) -> MetricsReport:
    """Single run of every case under one configuration. Per-case failures
    are recorded and the run continues."""
    config = ablation.apply(engine.config)
    run_engine = Engine(engine.catalog, config, engine.gateway.provider)
    if hasattr(engine.gateway.provider, "reset"):
        engine.gateway.provider.reset()
    report = MetricsReport(ablation.name, ablation.description)
    for case in sorted(cases, key=lambda c: c.id):
        entry = CaseResult(case.id)
        ledger = run_engine.gateway.new_ledger(f"{ablation.name}:{case.id}")
        try:
            result = run_engine.writer.run_pipeline(
                case.question, case.user, case.product_areas, ledger
            )
        except ScriptMissError:
            raise  # test-configuration bug: surface loudly
        except Exception as exc:  # pragma: no cover - defensive
            logger.exception("case %s crashed", case.id)
            entry.failure = str(exc)
            report.cases.append(entry)
            continue
        entry.llm_calls = ledger.llm_calls
        entry.ebr_queries = ledger.ebr_queries
        entry.db_queries = ledger.db_queries
        if not result.ok:
            entry.failure = result.failure
            report.cases.append(entry)
            continue
        tables, columns = response_refs(result, engine.catalog, config.default_database)
        entry.table_recall = table_recall(tables, case.ground_truths)
        entry.column_recall = column_recall(tables, columns, case.ground_truths)
        entry.compiled = result.validation.is_valid
        entry.valid_schema = not (
            result.validation.unknown_tables or result.validation.unknown_columns
        )
        if use_judge:
            entry.score = judge(case, result.draft.sql, run_engine.gateway, ledger)
        report.cases.append(entry)
    return report


# --- rendering ----------------------------------------------------------------

_COLUMNS = (
    ("Index", "config"),
    ("Description", "description"),
    ("Table Recall", "table_recall"),
    ("Column Recall", "column_recall"),
    ("Score (% 4+)", "score_pct_4_plus"),
    ("Successful compilation", "compilation_rate"),
    ("Valid tables & columns", "valid_tables_columns_rate"),
    ("LLM calls", "llm_calls"),
    ("EBR queries", "ebr_queries"),
    ("DB queries", "db_queries"),
)

_PERCENT_KEYS = {
    "table_recall", "column_recall", "score_pct_4_plus",
    "compilation_rate", "valid_tables_columns_rate",
}


def _cell(key: str, value) -> str:
    if key in _PERCENT_KEYS:
        return f"{value * 100:.0f}%"
    if key in ("llm_calls", "ebr_queries", "db_queries"):
        return f"{value:.1f}"
    return str(value)


def render_text(reports: list[MetricsReport]) -> str:
    rows = [[header for header, _ in _COLUMNS]]
    for report in reports:
        agg = report.aggregate()
        rows.append([_cell(key, agg[key]) for _, key in _COLUMNS])
    widths = [max(len(row[i]) for row in rows) for i in range(len(_COLUMNS))]
    lines = []
    for r, row in enumerate(rows):
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip())
        if r == 0:
            lines.append("  ".join("-" * widths[i] for i in range(len(widths))))
    return "\n".join(lines) + "\n"


def render_csv(reports: list[MetricsReport]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer)
    writer.writerow([header for header, _ in _COLUMNS])
    for report in reports:
        agg = report.aggregate()
        writer.writerow([_cell(key, agg[key]) for _, key in _COLUMNS])
    return buffer.getvalue()


def render_json(reports: list[MetricsReport]) -> str:
    payload = []
    for report in reports:
        agg = report.aggregate()
        agg["per_case"] = [
            {
                "id": c.case_id,
                "table_recall": c.table_recall,
                "column_recall": c.column_recall,
                "score": c.score.overall if c.score else None,
                "compiled": c.compiled,
                "valid_schema": c.valid_schema,
                "llm_calls": c.llm_calls,
                "ebr_queries": c.ebr_queries,
                "db_queries": c.db_queries,
                "failure": c.failure,
            }
            for c in report.cases
        ]
        payload.append(agg)
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def render(reports: list[MetricsReport], fmt: str = "txt") -> str:
    if fmt == "txt":
        return render_text(reports)
    if fmt == "csv":
        return render_csv(reports)
    if fmt == "json":
        return render_json(reports)
    raise ValueError(f"unknown report format: {fmt}")

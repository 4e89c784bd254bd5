"""Stages 2-4 of the query-writing agent: LLM table ranking, two-tier
column ranking, query writing, and the bounded validation/fix loop with the
researcher sub-agent.

Every LLM exchange is JSON-constrained with one format re-ask; prompt
assembly is a pure function of (context, config, template version) so runs
under a scripted provider are byte-deterministic.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Callable

from lakeql.catalog import Catalog, NotFoundError
from lakeql.config import EngineConfig
from lakeql.gateway import (
    CallLedger,
    FormatError,
    LlmGateway,
    ProviderError,
    complete_json,
)
from lakeql.retrieval.context import RetrievedContext, Retriever
from lakeql.sqlanalysis import (
    SqlSyntaxError,
    ValidationMode,
    ValidationReport,
    extract_refs,
    parse,
    validate,
)

from . import prompts
from .types import (
    MAX_FIX_ITERATIONS,
    PipelineResult,
    QueryDraft,
    RankedColumns,
    RankedTable,
    ResearchFinding,
    ToolCall,
)

logger = logging.getLogger(__name__)

ProgressFn = Callable[[str, str], None]


def _no_progress(stage: str, detail: str) -> None:
    pass


@dataclass
class QueryWriterAgent:
    """Binds the catalog, retriever, gateway, and config into the pipeline."""

    catalog: Catalog
    retriever: Retriever
    gateway: LlmGateway
    config: EngineConfig
    warnings: list[str] = field(default_factory=list)

    def warn(self, message: str) -> None:
        self.warnings.append(message)
        logger.warning(message)

    # --- stage 2: ranking ---

    def rank_tables(
        self, ctx: RetrievedContext, ledger: CallLedger, k_rnk: int | None = None
    ) -> list[RankedTable]:
        """One LLM call scoring every retrieved table 1-10; top k_rnk kept,
        ties broken by retrieval order. Schemas are deliberately absent from
        this prompt."""
        if not ctx.tables:
            raise ValueError("rank_tables requires a non-empty retrieved context")
        k_rnk = k_rnk or self.config.k_rnk
        if self.config.knowledge.popularity_joins:
            # tables_block pulls each table's common joins from the index
            ledger.record_db("common_joins")
        prompt = prompts.load_template("table_ranker").render(
            question=ctx.question,
            tables=prompts.tables_block(ctx, self.config, self.catalog),
            examples=prompts.examples_block(ctx),
            knowledge=prompts.knowledge_block(ctx),
            jargon=prompts.jargon_block(ctx),
        )
        raw = complete_json(self.gateway, "table_ranker", prompt, ledger)
        if not isinstance(raw, list):
            raise FormatError("table_ranker", json.dumps(raw))
        known = {t.node.key for t in ctx.tables}
        order = {key: i for i, key in enumerate(ctx.table_keys)}
        ranked: list[RankedTable] = []
        for entry in raw:
            table = str(entry.get("table", "")).lower()
            if table not in known:
                self.warn(f"table_ranker returned unknown table {table!r}; dropped")
                continue
            score = entry.get("score", 0)
            try:
                score = int(score)
            except (TypeError, ValueError):
                self.warn(f"table_ranker score unparseable for {table}; clamped to 1")
                score = 1
            if not 1 <= score <= 10:
                clamped = min(10, max(1, score))
                self.warn(f"table_ranker score {score} out of range; clamped to {clamped}")
                score = clamped
            ranked.append(RankedTable(table, score, str(entry.get("explanation", ""))))
        ranked.sort(key=lambda r: (-r.relevance_score, order.get(r.table, 1 << 30)))
        return ranked[:k_rnk]

    def rank_columns(
        self,
        ctx: RetrievedContext,
        ranked_tables: list[RankedTable],
        ledger: CallLedger,
    ) -> RankedColumns:
        """One LLM call over full schemas of the ranked tables; both tiers
        are forwarded to the writer."""
        if not ranked_tables:
            raise ValueError("rank_columns requires ranked tables")
        keys = [r.table for r in ranked_tables]
        prompt = prompts.load_template("column_ranker").render(
            question=ctx.question,
            schemas=prompts.schemas_block(keys, ctx, self.config),
            rankings=prompts.rankings_block(ranked_tables),
            examples=prompts.examples_block(ctx),
            knowledge=prompts.knowledge_block(ctx),
            jargon=prompts.jargon_block(ctx),
        )
        raw = complete_json(self.gateway, "column_ranker", prompt, ledger)
        if not isinstance(raw, dict):
            raise FormatError("column_ranker", json.dumps(raw))
        relevant: dict[str, tuple[str, ...]] = {}
        potential: dict[str, tuple[str, ...]] = {}
        for table, tiers in raw.items():
            table = str(table).lower()
            if table not in keys:
                self.warn(f"column_ranker returned unranked table {table!r}; dropped")
                continue
            existing = {c.column_name for c in ctx.columns.get(table, [])}

            def clean(names) -> tuple[str, ...]:
                kept = []
                for name in names or ():
                    name = str(name).lower()
                    if name in existing:
                        if name not in kept:
                            kept.append(name)
                    else:
                        self.warn(
                            f"column_ranker returned unknown column {table}.{name}; dropped"
                        )
                return tuple(kept)

            tier_one = clean(tiers.get("relevant"))
            tier_two = tuple(
                c for c in clean(tiers.get("potentially_relevant")) if c not in tier_one
            )
            relevant[table] = tier_one
            potential[table] = tier_two
        return RankedColumns(relevant, potential)

    # --- stage 3: writing ---

    def write_query(
        self,
        ctx: RetrievedContext,
        ranked_tables: list[RankedTable],
        ranked_columns: RankedColumns | None,
        ledger: CallLedger,
    ) -> QueryDraft:
        keys = [r.table for r in ranked_tables]
        prompt = prompts.load_template("query_writer").render(
            question=ctx.question,
            schemas=prompts.schemas_block(keys, ctx, self.config, ranked_columns),
            rankings=prompts.rankings_block(ranked_tables),
            examples=prompts.examples_block(ctx),
            knowledge=prompts.knowledge_block(ctx),
            jargon=prompts.jargon_block(ctx),
        )
        raw = complete_json(self.gateway, "query_writer", prompt, ledger)
        return self._draft_from_json(raw, "query_writer")

    def _draft_from_json(self, raw, role: str) -> QueryDraft:
        if not isinstance(raw, dict) or not str(raw.get("sql", "")).strip():
            raise FormatError(role, json.dumps(raw))
        if "assumptions" not in raw:
            self.warn(f"{role} response missing assumptions; treated as empty")
        return QueryDraft(
            assumptions=tuple(str(a) for a in raw.get("assumptions", ())),
            sql=str(raw["sql"]),
            explanation=str(raw.get("explanation", "")),
            tables=tuple(str(t).lower() for t in raw.get("tables", ())),
            columns=tuple(str(c).lower() for c in raw.get("columns", ())),
        )

    # --- stage 4: validate / research / fix ---

    def validate_draft(self, draft: QueryDraft, ledger: CallLedger) -> ValidationReport:
        """Full-mode validation plus a cross-check of the draft's own
        table/column claims against extraction."""
        report = validate(
            draft.sql,
            self.catalog,
            ValidationMode.FULL,
            default_database=self.config.default_database,
        )
        ledger.record_db("validate", validator=True)
        if report.is_valid:
            try:
                refs = extract_refs(
                    parse(draft.sql),
                    self.catalog,
                    self.config.default_database,
                    strict=False,
                )
                claimed = {t.lower() for t in draft.tables}
                if claimed != set(refs.tables):
                    self.warn(
                        f"draft claims tables {sorted(claimed)} but SQL uses "
                        f"{sorted(refs.tables)}"
                    )
            except SqlSyntaxError:  # pragma: no cover - valid report implies parse
                pass
        return report

    def research(
        self,
        ctx: RetrievedContext,
        report: ValidationReport,
        ledger: CallLedger,
    ) -> ResearchFinding:
        """Tool loop resolving hallucinated tables/columns, then a
        self-reflection check with one revision round."""
        if not (report.unknown_tables or report.unknown_columns):
            raise ValueError("research requires hallucination errors in the report")
        finding = ResearchFinding()
        errors = "\n".join(report.summary_lines())
        transcript: list[str] = []
        feedback = ""
        budget = self.config.researcher_tool_budget
        revisions = 0

        while True:
            finished = False
            while budget > 0:
                raw = complete_json(
                    self.gateway, "researcher", self._researcher_prompt(
                        ctx, errors, transcript, feedback
                    ), ledger,
                )
                action = str(raw.get("action", "")) if isinstance(raw, dict) else ""
                if action == "finish" or not action:
                    finding.recommendation = str(raw.get("recommendation", ""))
                    finished = True
                    break
                arguments = raw.get("arguments", {}) or {}
                digest = self._run_research_tool(action, arguments, finding, ledger)
                transcript.append(f"{action}({json.dumps(arguments, sort_keys=True)}) -> {digest}")
                finding.tool_trace.append(ToolCall(action, dict(arguments), digest))
                budget -= 1
            if not finished:
                if not finding.recommendation:
                    finding.recommendation = "insufficient information"
                self.warn("researcher tool budget exhausted")
            reflection = complete_json(
                self.gateway, "reflection", self._reflection_prompt(ctx, errors, finding),
                ledger,
            )
            finding.reflection_approved = bool(
                isinstance(reflection, dict) and reflection.get("approved")
            )
            if finding.reflection_approved or revisions >= self.config.reflection_revisions:
                break
            revisions += 1
            feedback = str(reflection.get("feedback", "")) if isinstance(reflection, dict) else ""
        return finding

    def _researcher_prompt(
        self, ctx: RetrievedContext, errors: str, transcript: list[str], feedback: str
    ) -> str:
        return prompts.load_template("researcher").render(
            question=ctx.question,
            errors=errors or "(none)",
            context_tables=", ".join(ctx.table_keys) or "(none)",
            feedback=feedback or "(none)",
            transcript="\n".join(transcript) or "(none)",
        )

    def _reflection_prompt(
        self, ctx: RetrievedContext, errors: str, finding: ResearchFinding
    ) -> str:
        return prompts.load_template("reflection").render(
            question=ctx.question,
            errors=errors or "(none)",
            recommendation=finding.recommendation or "(none)",
            updated_tables=", ".join(finding.updated_tables) or "(none)",
        )

    def _run_research_tool(
        self, action: str, arguments: dict, finding: ResearchFinding, ledger: CallLedger
    ) -> str:
        if action == "search_tables":
            query = str(arguments.get("query", ""))
            vector = self.retriever.embedder.embed_one(query)
            ledger.record_embedding("researcher")
            hits = self.catalog.search_tables(vector, k=5)
            ledger.record_ebr("researcher_search", 1)
            return "; ".join(f"{node.key} ({score:.2f})" for node, score in hits) or "(no hits)"
        if action == "get_table_metadata":
            key = str(arguments.get("table", "")).lower()
            ledger.record_db("researcher_metadata")
            try:
                node = self.catalog.get_table(key)
            except NotFoundError:
                return f"unknown table: {key}"
            return f"{node.key}: {node.description or '(no description)'}"
        if action == "get_columns":
            key = str(arguments.get("table", "")).lower()
            ledger.record_db("researcher_columns")
            try:
                columns = self.catalog.get_columns(key)
            except NotFoundError:
                return f"unknown table: {key}"
            return ", ".join(c.column_name for c in columns) or "(no columns)"
        if action == "update_context":
            added = []
            for key in arguments.get("tables", ()):
                key = str(key).lower()
                if self.catalog.has_table(key):
                    if key not in finding.updated_tables:
                        finding.updated_tables.append(key)
                        added.append(key)
                else:
                    self.warn(f"researcher tried to add unknown table {key}")
            return "added: " + (", ".join(added) or "(nothing)")
        self.warn(f"researcher requested unknown tool {action!r}")
        return f"unknown tool: {action}"

    def fix_query(
        self,
        ctx: RetrievedContext,
        draft: QueryDraft,
        report: ValidationReport,
        finding: ResearchFinding | None,
        ledger: CallLedger,
        extra_errors: tuple[str, ...] = (),
    ) -> QueryDraft:
        """One LLM call with the draft and all errors batched together, plus
        the research recommendation when present."""
        if report.is_valid and not extra_errors:
            raise ValueError("fix_query requires an invalid report")
        schemas = self._fixer_schemas(ctx, draft, report, finding)
        prompt = prompts.load_template("query_fixer").render(
            question=ctx.question,
            sql=draft.sql,
            errors="\n".join(list(extra_errors) + report.summary_lines()),
            recommendation=(finding.recommendation if finding else "") or "(none)",
            schemas=schemas,
        )
        try:
            raw = complete_json(self.gateway, "query_fixer", prompt, ledger)
            return self._draft_from_json(raw, "query_fixer")
        except FormatError:
            self.warn("query_fixer failed to produce a parseable draft; keeping previous")
            return draft

    def _fixer_schemas(
        self,
        ctx: RetrievedContext,
        draft: QueryDraft,
        report: ValidationReport,
        finding: ResearchFinding | None,
    ) -> str:
        """Schemas shown to the fixer: researcher-updated tables when
        available, otherwise the draft's tables plus ranked tables carrying
        hallucinated columns."""
        keys: list[str] = []
        if finding is not None:
            keys.extend(finding.updated_tables)
        for table in draft.tables:
            if self.catalog.has_table(table) and table not in keys:
                keys.append(table)
        if finding is None:
            bad_tables = {key.rsplit(".", 1)[0] for key, _ in report.unknown_columns}
            for table in bad_tables:
                if self.catalog.has_table(table) and table not in keys:
                    keys.append(table)
        parts = []
        for key in keys:
            try:
                node = self.catalog.get_table(key)
                columns = self.catalog.get_columns(key)
            except NotFoundError:
                continue
            parts.append(prompts.render_schema(
                node,
                columns,
                include_attributes=self.config.knowledge.table_column_attributes,
                popularity_order=self.config.knowledge.popularity_joins,
            ))
        return "\n\n".join(parts) if parts else "(none)"

    # --- the full pipeline ---

    def run_pipeline(
        self,
        question: str,
        user: str,
        product_areas: tuple[str, ...],
        ledger: CallLedger,
        progress: ProgressFn = _no_progress,
    ) -> PipelineResult:
        """retrieve -> rank -> write -> validate, then at most two
        research/fix rounds while the draft stays invalid."""
        result = PipelineResult(question=question)
        config = self.config
        try:
            progress("retrieve", "Retrieving context from the knowledge graph")
            ctx = self.retriever.retrieve(question, user, product_areas, ledger)
            result.context = ctx
            if ctx.is_empty:
                result.failure = "; ".join(ctx.diagnostics) or "no candidate tables"
                return result

            if config.modeling.rankers:
                progress("rank_tables", "Ranking candidate tables")
                result.ranked_tables = self.rank_tables(ctx, ledger)
                progress("rank_columns", "Selecting relevant columns")
                result.ranked_columns = self.rank_columns(ctx, result.ranked_tables, ledger)
            else:
                # Rankers ablated: first K tables straight from retrieval,
                # every column forwarded.
                result.ranked_tables = [
                    RankedTable(key, None) for key in ctx.table_keys[: config.k_rnk]
                ]
                result.ranked_columns = None

            progress("write", "Writing the query")
            draft = self.write_query(ctx, result.ranked_tables, result.ranked_columns, ledger)
            progress("validate", "Validating the query")
            report = self.validate_draft(draft, ledger)

            iterations = 0
            while (
                not report.is_valid
                and config.modeling.fixer
                and iterations < min(config.max_fix_iterations, MAX_FIX_ITERATIONS)
            ):
                finding = None
                has_hallucinations = bool(report.unknown_tables or report.unknown_columns)
                if has_hallucinations and config.modeling.researcher:
                    progress("research", "Researching catalog metadata for fixes")
                    finding = self.research(ctx, report, ledger)
                    result.findings.append(finding)
                progress("fix", f"Fixing the query (round {iterations + 1})")
                draft = self.fix_query(ctx, draft, report, finding, ledger)
                progress("validate", "Re-validating the query")
                report = self.validate_draft(draft, ledger)
                iterations += 1

            result.draft = draft
            result.validation = report
            result.fix_iterations = iterations
        except (FormatError, ProviderError) as exc:
            result.failure = str(exc)
        result.warnings = list(self.warnings)
        self.warnings = []
        result.counters = {
            "llm_calls": ledger.llm_calls,
            "embedding_calls": ledger.embedding_calls,
            "ebr_queries": ledger.ebr_queries,
            "db_queries": ledger.db_queries,
            "validator_calls": ledger.validator_calls,
        }
        return result

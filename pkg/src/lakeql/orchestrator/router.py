"""Multi-agent routing: intent classification and the four agents behind
the chat surface (query writer, data finder, query fixer, QA)."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from lakeql.agents.pipeline import ProgressFn, QueryWriterAgent, _no_progress
from lakeql.agents.types import PipelineResult, QueryDraft, RankedTable
from lakeql.catalog import Catalog, NotFoundError
from lakeql.config import EngineConfig
from lakeql.gateway import CallLedger, FormatError, LlmGateway, complete_json
from lakeql.agents import prompts
from lakeql.retrieval.context import RetrievedContext, Retriever
from lakeql.sqlanalysis import ValidationReport

from .qa import QaAgent
from .session import Session, SessionStore, Turn, UserMessage

logger = logging.getLogger(__name__)

INTENTS = ("write_query", "find_data", "fix_query", "question_answering")

QUICK_REPLIES = {
    "query_output": [
        "Explain this query",
        "Use different tables",
        "Add a date filter",
    ],
    "table_output": [
        "Use the selected tables and write the query",
        "Show example queries for these tables",
        "Which of these is certified?",
    ],
    "fix_output": [
        "Explain the fix",
        "Write a new query instead",
    ],
    "answer": [
        "Write a query for this",
        "Find related tables",
    ],
    "clarification": [
        "Find tables for my team",
        "Write a query",
    ],
}


@dataclass(frozen=True)
class Intent:
    kind: str
    follow_up: bool = False
    rationale: str = ""

    def __post_init__(self):
        if self.kind not in INTENTS:
            raise ValueError(f"unknown intent: {self.kind}")


@dataclass
class BotResponse:
    kind: str  # query_output | table_output | fix_output | answer | clarification | error
    text: str
    payload: dict = field(default_factory=dict)
    quick_replies: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "text": self.text,
            "payload": self.payload,
            "quick_replies": self.quick_replies,
        }


def report_to_json(report: ValidationReport | None) -> dict:
    if report is None:
        return {"is_valid": False, "syntax_errors": [], "unknown_tables": [],
                "unknown_columns": [], "unknown_functions": []}
    return {
        "is_valid": report.is_valid,
        "syntax_errors": [msg for msg, _ in report.syntax_errors],
        "unknown_tables": [key for key, _ in report.unknown_tables],
        "unknown_columns": [key for key, _ in report.unknown_columns],
        "unknown_functions": [name for name, _ in report.unknown_functions],
    }


class Orchestrator:
    def __init__(
        self,
        catalog: Catalog,
        retriever: Retriever,
        writer: QueryWriterAgent,
        qa: QaAgent,
        gateway: LlmGateway,
        config: EngineConfig,
        sessions: SessionStore,
    ):
        self.catalog = catalog
        self.retriever = retriever
        self.writer = writer
        self.qa = qa
        self.gateway = gateway
        self.config = config
        self.sessions = sessions

    # --- intent classification ---

    def classify_intent(
        self, session: Session, message: UserMessage, ledger: CallLedger
    ) -> Intent:
        """Deterministic rule overrides first, then one LLM call."""
        if message.attachment is not None:
            return Intent("fix_query", rationale="failed-execution attachment")
        if message.selected_tables and not message.text.strip():
            return Intent("find_data", follow_up=True, rationale="table selections only")
        prompt = prompts.load_template("intent_classifier").render(
            question=message.text,
            history=session.history_text() or "(new session)",
        )
        try:
            raw = complete_json(self.gateway, "intent_classifier", prompt, ledger)
        except FormatError:
            logger.warning("intent classifier response unparseable; defaulting to QA")
            return Intent("question_answering", rationale="classifier format failure")
        kind = str(raw.get("intent", "")) if isinstance(raw, dict) else ""
        if kind not in INTENTS:
            logger.warning("intent classifier returned %r; defaulting to QA", kind)
            return Intent("question_answering", rationale="unsupported intent")
        return Intent(
            kind,
            follow_up=bool(raw.get("follow_up", False)),
            rationale=str(raw.get("rationale", "")),
        )

    # --- message handling ---

    def handle_message(
        self,
        session: Session,
        message: UserMessage,
        ledger: CallLedger,
        progress: ProgressFn = _no_progress,
    ) -> BotResponse:
        """Route one turn; turns within a session are strictly serial."""
        with session.turn_lock:
            session.append(Turn("user", message.text, payload={
                "selected_tables": list(message.selected_tables),
                "attachment": bool(message.attachment),
            }))
            if (
                not message.text.strip()
                and message.attachment is None
                and not message.selected_tables
            ):
                response = BotResponse(
                    "clarification",
                    "Tell me what you need: a query written, tables found, "
                    "a query fixed, or a data question answered.",
                    quick_replies=QUICK_REPLIES["clarification"],
                )
                session.append(Turn("bot", response.text, response.to_json()))
                return response

            progress("intent", "Classifying the request")
            intent = self.classify_intent(session, message, ledger)
            try:
                if intent.kind == "write_query":
                    response = self._write_query(session, message, intent, ledger, progress)
                elif intent.kind == "find_data":
                    response = self._find_data(session, message, ledger, progress)
                elif intent.kind == "fix_query":
                    response = self._fix_query(session, message, ledger, progress)
                else:
                    response = self._question_answering(session, message, ledger, progress)
            except Exception as exc:  # surface, never crash the session
                logger.exception("turn failed")
                response = BotResponse(
                    "error",
                    f"Something went wrong handling that request: {exc}. "
                    "Try rephrasing or narrowing the question.",
                )
            session.append(Turn("bot", response.text, response.to_json()))
            return response

    # --- write_query ---

    def _write_query(
        self,
        session: Session,
        message: UserMessage,
        intent: Intent,
        ledger: CallLedger,
        progress: ProgressFn,
    ) -> BotResponse:
        selected = message.selected_tables
        if intent.follow_up and session.last_context is not None and selected:
            # Follow-up with explicit table selections: write stage only, no
            # re-retrieval, no re-ranking.
            ctx = session.last_context
            ctx.question = message.text
            ranked = [RankedTable(key, None) for key in selected]
            for key in selected:
                if key not in ctx.columns and self.catalog.has_table(key):
                    ctx.columns[key] = self.catalog.get_columns(key)
            progress("write", "Writing the query from the selected tables")
            result = self._write_and_fix(ctx, ranked, None, ledger, progress)
        else:
            result = self.writer.run_pipeline(
                message.text, session.user, session.product_areas, ledger, progress
            )
        session.last_context = result.context or session.last_context
        session.last_result = result
        if not result.ok:
            return BotResponse(
                "error",
                f"I could not write that query: {result.failure}. "
                "Try naming the tables or narrowing the question.",
            )
        return self._query_output(result)

    def _write_and_fix(
        self,
        ctx: RetrievedContext,
        ranked: list[RankedTable],
        ranked_columns,
        ledger: CallLedger,
        progress: ProgressFn,
    ) -> PipelineResult:
        """Write -> validate -> bounded fix loop, against a prepared context."""
        result = PipelineResult(question=ctx.question, context=ctx, ranked_tables=ranked)
        draft = self.writer.write_query(ctx, ranked, ranked_columns, ledger)
        progress("validate", "Validating the query")
        report = self.writer.validate_draft(draft, ledger)
        iterations = 0
        while (
            not report.is_valid
            and self.config.modeling.fixer
            and iterations < self.config.max_fix_iterations
        ):
            finding = None
            if (report.unknown_tables or report.unknown_columns) and self.config.modeling.researcher:
                progress("research", "Researching catalog metadata")
                finding = self.writer.research(ctx, report, ledger)
                result.findings.append(finding)
            progress("fix", f"Fixing the query (round {iterations + 1})")
            draft = self.writer.fix_query(ctx, draft, report, finding, ledger)
            progress("validate", "Re-validating the query")
            report = self.writer.validate_draft(draft, ledger)
            iterations += 1
        result.draft = draft
        result.validation = report
        result.fix_iterations = iterations
        return result

    def _query_output(self, result: PipelineResult) -> BotResponse:
        draft = result.draft
        references = []
        if result.context is not None:
            references = [
                {"id": e.id, "description": e.description, "sql": e.sql}
                for e in result.context.examples
            ]
        payload = {
            "sql": draft.sql,
            "explanation": draft.explanation,
            "assumptions": list(draft.assumptions),
            "tables": list(draft.tables),
            "columns": list(draft.columns),
            "validation": report_to_json(result.validation),
            "references": references,
            "fix_iterations": result.fix_iterations,
            "ranked_tables": [
                {"table": r.table, "score": r.relevance_score, "explanation": r.explanation}
                for r in result.ranked_tables
            ],
        }
        valid = result.validation.is_valid if result.validation else False
        text = (
            "Here is the query." if valid
            else "Here is my best attempt; validation still reports issues."
        )
        return BotResponse(
            "query_output", text, payload, list(QUICK_REPLIES["query_output"])
        )

    # --- find_data ---

    def _find_data(
        self,
        session: Session,
        message: UserMessage,
        ledger: CallLedger,
        progress: ProgressFn,
    ) -> BotResponse:
        if message.selected_tables and not message.text.strip():
            # Selection-only follow-up: re-present the already-retrieved
            # tables narrowed to the selection; no new retrieval.
            ranked = [RankedTable(key, None) for key in message.selected_tables]
        else:
            progress("retrieve", "Searching the knowledge graph for tables")
            ctx = self.retriever.retrieve(
                message.text, session.user, session.product_areas, ledger
            )
            if ctx.is_empty:
                return BotResponse(
                    "clarification",
                    "I could not find candidate tables. Name a table or a "
                    "product area to narrow the search.",
                    quick_replies=QUICK_REPLIES["clarification"],
                )
            if self.config.modeling.rankers:
                progress("rank_tables", "Ranking candidate tables")
                ranked = self.writer.rank_tables(ctx, ledger)
            else:
                ranked = [
                    RankedTable(key, None) for key in ctx.table_keys[: self.config.k_rnk]
                ]
            session.last_context = ctx
        rows = []
        for entry in ranked:
            try:
                node = self.catalog.get_table(entry.table)
            except NotFoundError:
                continue
            joins = self.catalog.get_common_joins(node.key, self.config.common_joins_k)
            rows.append({
                "table": node.key,
                "description": node.description or "",
                "popularity": node.usage_popularity,
                "commonly_joined": [edge.partner_of(node.key) for edge in joins],
                "is_certified": node.is_certified,
                "is_deprecated": node.is_deprecated,
                "score": entry.relevance_score,
                "explanation": entry.explanation,
                "selectable": True,
            })
        ledger.record_db("table_output_joins")
        session.last_table_output = tuple(row["table"] for row in rows)
        return BotResponse(
            "table_output",
            "Here are the most relevant tables. Select the ones to use.",
            {"tables": rows},
            list(QUICK_REPLIES["table_output"]),
        )

    # --- fix_query ---

    def _fix_query(
        self,
        session: Session,
        message: UserMessage,
        ledger: CallLedger,
        progress: ProgressFn,
    ) -> BotResponse:
        attachment = message.attachment
        sql = attachment.sql if attachment else ""
        if not sql and session.last_result and session.last_result.draft:
            sql = session.last_result.draft.sql
        if not sql:
            return BotResponse(
                "clarification",
                "Paste the failing SQL (and the error message) so I can debug it.",
                quick_replies=QUICK_REPLIES["clarification"],
            )
        question = message.text.strip() or "Fix this query"
        ctx = session.last_context or RetrievedContext(
            question=question, user=session.user, product_areas=session.product_areas
        )
        ctx.question = question
        draft = QueryDraft((), sql, "", (), ())
        progress("validate", "Validating the query")
        report = self.writer.validate_draft(draft, ledger)
        extra = (f"execution error: {attachment.error}",) if attachment and attachment.error else ()
        iterations = 0
        finding = None
        while (
            (not report.is_valid or (iterations == 0 and extra))
            and iterations < self.config.max_fix_iterations
        ):
            if (report.unknown_tables or report.unknown_columns) and self.config.modeling.researcher:
                progress("research", "Researching catalog metadata")
                finding = self.writer.research(ctx, report, ledger)
            progress("fix", f"Fixing the query (round {iterations + 1})")
            draft = self.writer.fix_query(
                ctx, draft, report, finding, ledger, extra_errors=extra
            )
            extra = ()
            progress("validate", "Re-validating the query")
            report = self.writer.validate_draft(draft, ledger)
            iterations += 1
            if report.is_valid:
                break
        payload = {
            "original_sql": sql,
            "sql": draft.sql,
            "explanation": draft.explanation,
            "validation": report_to_json(report),
            "recommendation": finding.recommendation if finding else "",
            "fix_iterations": iterations,
        }
        text = (
            "Fixed the query; validation passes now."
            if report.is_valid
            else "I attempted a fix, but validation still reports issues."
        )
        session.last_result = None
        return BotResponse("fix_output", text, payload, list(QUICK_REPLIES["fix_output"]))

    # --- question answering ---

    def _question_answering(
        self,
        session: Session,
        message: UserMessage,
        ledger: CallLedger,
        progress: ProgressFn,
    ) -> BotResponse:
        progress("qa", "Answering from catalog metadata and wikis")
        answer = self.qa.answer(message.text, ledger)
        payload = {
            "text": answer.text,
            "difficulty": answer.difficulty,
            "low_confidence": answer.low_confidence,
            "tool_calls": answer.tool_calls,
        }
        return BotResponse("answer", answer.text, payload, list(QUICK_REPLIES["answer"]))

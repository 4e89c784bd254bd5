"""Question-answering agent: difficulty-gated tool loop with pre-fetched
table metadata, a local wiki corpus, and reflection only for complex paths."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from lakeql.agents import prompts
from lakeql.catalog import Catalog, NotFoundError
from lakeql.config import EngineConfig
from lakeql.gateway import CallLedger, LlmGateway, complete_json
from lakeql.retrieval.context import Retriever
from lakeql.sqlanalysis import ValidationMode, validate

logger = logging.getLogger(__name__)


@dataclass
class QaAnswer:
    text: str
    difficulty: str = "simple"
    tool_calls: list[str] = field(default_factory=list)
    reflection_calls: int = 0
    low_confidence: bool = False


class QaAgent:
    def __init__(
        self,
        catalog: Catalog,
        retriever: Retriever,
        gateway: LlmGateway,
        config: EngineConfig,
    ):
        self.catalog = catalog
        self.retriever = retriever
        self.gateway = gateway
        self.config = config

    def answer(self, question: str, ledger: CallLedger) -> QaAnswer:
        prefetched = self._prefetch(question, ledger)
        transcript: list[str] = []
        result = QaAnswer(text="")
        budget_used = 0
        budget = self.config.qa_simple_tool_budget

        while True:
            raw = complete_json(
                self.gateway,
                "qa_agent",
                prompts.load_template("qa_agent").render(
                    question=question,
                    prefetched=prefetched or "(none)",
                    transcript="\n".join(transcript) or "(none)",
                ),
                ledger,
            )
            if not isinstance(raw, dict):
                result.text = str(raw)
                break
            if not result.tool_calls and not transcript:
                result.difficulty = str(raw.get("difficulty", "simple"))
                budget = (
                    self.config.qa_complex_tool_budget
                    if result.difficulty == "complex"
                    else self.config.qa_simple_tool_budget
                )
            action = str(raw.get("action", "answer"))
            if action == "answer":
                result.text = str(raw.get("answer", ""))
                break
            if budget_used >= budget:
                result.text = str(raw.get("answer", "")) or (
                    "I could not gather enough information to answer confidently."
                )
                result.low_confidence = True
                break
            arguments = raw.get("arguments", {}) or {}
            digest = self._run_tool(action, arguments, ledger)
            transcript.append(
                f"{action}({json.dumps(arguments, sort_keys=True)}) -> {digest}"
            )
            result.tool_calls.append(action)
            budget_used += 1

        if result.difficulty == "complex":
            # complex answers get exactly one reflection pass
            reflection = complete_json(
                self.gateway,
                "qa_reflection",
                prompts.load_template("qa_reflection").render(
                    question=question,
                    answer=result.text,
                    transcript="\n".join(transcript) or "(none)",
                ),
                ledger,
            )
            result.reflection_calls = 1
            if isinstance(reflection, dict) and not reflection.get("approved", True):
                feedback = str(reflection.get("feedback", ""))
                if feedback:
                    result.text += f"\n\nCaveat: {feedback}"
        return result

    def _prefetch(self, question: str, ledger: CallLedger) -> str:
        """Table metadata for tables named in the message goes straight into
        the first prompt, saving routine tool calls."""
        mentioned = sorted(self.retriever.extract_table_mentions(question))
        if not mentioned:
            return ""
        ledger.record_db("qa_prefetch")
        parts = []
        for key in mentioned:
            try:
                node = self.catalog.get_table(key)
                columns = self.catalog.get_columns(key)
            except NotFoundError:
                continue
            parts.append(prompts.render_schema(node, columns))
        return "\n\n".join(parts)

    def _run_tool(self, action: str, arguments: dict, ledger: CallLedger) -> str:
        if action == "get_table_schema":
            key = str(arguments.get("table", "")).lower()
            ledger.record_db("qa_schema")
            try:
                node = self.catalog.get_table(key)
                columns = self.catalog.get_columns(key)
            except NotFoundError:
                return f"unknown table: {key}"
            return prompts.render_schema(node, columns)
        if action == "search_tables":
            query = str(arguments.get("query", ""))
            vector = self.retriever.embedder.embed_one(query)
            ledger.record_embedding("qa_search")
            hits = self.catalog.search_tables(vector, k=5)
            ledger.record_ebr("qa_search", 1)
            return "; ".join(f"{n.key} ({s:.2f})" for n, s in hits) or "(no hits)"
        if action == "search_wiki":
            return self._search_wiki(str(arguments.get("query", "")), ledger)
        if action == "validate_query":
            sql = str(arguments.get("sql", ""))
            report = validate(
                sql, self.catalog, ValidationMode.FULL,
                default_database=self.config.default_database,
            )
            ledger.record_db("qa_validate", validator=True)
            if report.is_valid:
                return "valid"
            return "; ".join(report.summary_lines())
        return f"unknown tool: {action}"

    def _search_wiki(self, query: str, ledger: CallLedger) -> str:
        """Keyword + embedding search over the local docs corpus."""
        docs_dir = Path(self.config.docs_dir) if self.config.docs_dir else None
        if not docs_dir or not docs_dir.is_dir():
            return "(no wiki corpus configured)"
        query_vec = self.retriever.embedder.embed_one(query)
        ledger.record_embedding("qa_wiki")
        tokens = set(query.lower().split())
        scored: list[tuple[float, str, str]] = []
        for path in sorted(docs_dir.glob("**/*")):
            if path.suffix not in (".md", ".txt") or not path.is_file():
                continue
            text = path.read_text(encoding="utf-8")
            keyword = sum(1 for t in tokens if t in text.lower())
            cosine = float(np.dot(query_vec, self.retriever.embedder.embed_one(text)))
            scored.append((keyword + cosine, path.name, text))
        scored.sort(key=lambda item: (-item[0], item[1]))
        if not scored or scored[0][0] <= 0:
            return "(no wiki matches)"
        name, text = scored[0][1], scored[0][2]
        snippet = " ".join(text.split())[:300]
        return f"{name}: {snippet}"

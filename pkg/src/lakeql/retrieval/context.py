"""Stage 1 of the query-writing pipeline: high-recall context assembly.

Tables come from three sources: embedding search over the table index
(restricted to the session's candidate tables), tables used by retrieved
examples (same restriction), and tables mentioned verbatim in the question
(exempt, so explicit user intent can never be crowded out). Provenance
precedence for dedup is mention > example > ebr.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field

import numpy as np

from lakeql.catalog import EXAMPLE_INDEX_LOOKUPS, Catalog
from lakeql.catalog.types import (
    ColumnNode,
    DomainKnowledgeRecord,
    ExampleQuery,
    TableNode,
)
from lakeql.clustering.pipeline import get_candidate_tables
from lakeql.config import EngineConfig
from lakeql.gateway import CallLedger

logger = logging.getLogger(__name__)

_MENTION_TOKEN_RE = re.compile(r"[A-Za-z_][\w$]*(?:\.[A-Za-z_][\w$]*)?")

PROVENANCE_ORDER = {"mention": 0, "example": 1, "ebr": 2}


@dataclass(frozen=True)
class RetrievedTable:
    node: TableNode
    provenance: str  # mention | example | ebr
    score: float


@dataclass
class RetrievedContext:
    question: str
    user: str
    product_areas: tuple[str, ...]
    candidate_tables: frozenset[str] = frozenset()
    tables: list[RetrievedTable] = field(default_factory=list)
    examples: list[ExampleQuery] = field(default_factory=list)
    columns: dict[str, list[ColumnNode]] = field(default_factory=dict)
    knowledge: list[DomainKnowledgeRecord] = field(default_factory=list)
    jargon: list[tuple[str, str]] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)

    @property
    def table_keys(self) -> list[str]:
        return [t.node.key for t in self.tables]

    @property
    def is_empty(self) -> bool:
        return not self.tables


class Retriever:
    def __init__(self, catalog: Catalog, config: EngineConfig, embedder=None):
        self.catalog = catalog
        self.config = config
        self.embedder = embedder or catalog.embedder

    def extract_table_mentions(self, question: str) -> set[str]:
        """Catalog keys mentioned in the question: ``db.table`` literals and
        bare table names (matching every database that has one)."""
        snap = self.catalog.snapshot
        by_name: dict[str, list[str]] = {}
        for key, node in snap.tables.items():
            by_name.setdefault(node.table_name, []).append(key)
        found: set[str] = set()
        for match in _MENTION_TOKEN_RE.finditer(question.lower()):
            token = match.group(0)
            if "." in token:
                if token in snap.tables:
                    found.add(token)
            elif token in by_name:
                found.update(by_name[token])
        return found

    def candidate_tables(
        self, user: str, product_areas: tuple[str, ...], diagnostics: list[str]
    ) -> frozenset[str]:
        snap = self.catalog.snapshot
        if snap.cluster_model is None or not self.config.knowledge.table_clusters:
            # No cluster artifacts (or clusters ablated): every live table is
            # a candidate.
            return frozenset(
                key for key, node in snap.tables.items() if not node.is_deprecated
            )
        areas = []
        for name in product_areas:
            area = snap.areas.get(name)
            if area is None:
                diagnostics.append(f"unknown product area: {name}")
            else:
                areas.append(area)
        result = get_candidate_tables(
            user,
            areas,
            snap.user_clusters,
            snap.cluster_model,
            self.catalog.email_groups,
        )
        if result.unknown_user:
            diagnostics.append(f"unknown user: {user}")
        return result.tables

    def retrieve(
        self,
        question: str,
        user: str,
        product_areas: tuple[str, ...],
        ledger: CallLedger,
    ) -> RetrievedContext:
        """Assemble the full retrieval context for one question."""
        config = self.config
        ctx = RetrievedContext(question, user, tuple(product_areas))
        ctx.candidate_tables = self.candidate_tables(user, product_areas, ctx.diagnostics)

        question_vector = self.embedder.embed_one(question)
        ledger.record_embedding("question")
        usable = bool(np.linalg.norm(question_vector) > 0)
        if not usable:
            ctx.diagnostics.append("question embedding unusable (no tokens)")

        mentions = self.extract_table_mentions(question)

        examples: list[tuple[ExampleQuery, float]] = []
        if config.knowledge.examples and usable and ctx.candidate_tables:
            examples = self.catalog.search_examples(
                question_vector, ctx.candidate_tables, config.k_examples
            )
            ledger.record_ebr("examples", EXAMPLE_INDEX_LOOKUPS)
        ctx.examples = [example for example, _ in examples]

        ebr_hits: list[tuple[TableNode, float]] = []
        if usable and ctx.candidate_tables:
            ebr_hits = self.catalog.search_tables(
                question_vector,
                candidate_filter=ctx.candidate_tables,
                k=config.k_ret,
                use_schema_embeddings=not config.knowledge.table_column_attributes,
            )
            ledger.record_ebr("tables", 1)

        ctx.tables = self._merge_tables(mentions, examples, ebr_hits, ctx.candidate_tables)
        if not ctx.tables:
            ctx.diagnostics.append("no candidate tables")
            return ctx

        for retrieved in ctx.tables:
            ctx.columns[retrieved.node.key] = self.catalog.get_columns(retrieved.node.key)
        ledger.record_db("columns_fetch")

        if config.knowledge.domain_knowledge_jargon:
            if product_areas:
                ctx.knowledge = self.catalog.get_domain_knowledge(
                    product_areas=product_areas
                )
                ledger.record_db("knowledge_fetch")
            ctx.jargon = self.catalog.match_jargon(question)
        return ctx

    def _merge_tables(
        self,
        mentions: set[str],
        examples: list[tuple[ExampleQuery, float]],
        ebr_hits: list[tuple[TableNode, float]],
        candidates: frozenset[str],
    ) -> list[RetrievedTable]:
        merged: dict[str, RetrievedTable] = {}

        for key in sorted(mentions):
            node = self.catalog.snapshot.tables.get(key)
            if node is not None:
                merged[key] = RetrievedTable(node, "mention", 1.0)

        for example, score in examples:
            for key in sorted(example.tables):
                if key in merged or key not in candidates:
                    continue
                node = self.catalog.snapshot.tables.get(key)
                if node is not None and not node.is_deprecated:
                    merged[key] = RetrievedTable(node, "example", score)

        for node, score in ebr_hits:
            if node.key not in merged:
                merged[node.key] = RetrievedTable(node, "ebr", score)

        ordered = sorted(
            merged.values(),
            key=lambda t: (
                PROVENANCE_ORDER[t.provenance],
                -t.score,
                -t.node.usage_popularity,
                t.node.key,
            ),
        )
        return ordered[: self.config.k_ret]

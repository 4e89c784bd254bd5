"""The knowledge-graph store: tables, columns, usage, joins, examples,
domain knowledge, jargon, clusters, and product areas, with embedding-based
and keyed retrieval.

Reads are lock-free over an immutable snapshot; every write builds a new
snapshot and swaps it in atomically, so readers never observe partial
updates. Vector search is an exhaustive cosine scan: catalogs here are
desk-scale and determinism beats ANN cleverness.
"""

from __future__ import annotations

import hashlib
import logging
import re
import threading
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from typing import Iterable, Sequence

import numpy as np

from lakeql.clustering.pipeline import ClusterModel, UserClusterMap
from lakeql.sqlanalysis import SqlSyntaxError, extract_refs, parse
from lakeql.sqlanalysis.usage import UsageStats

from .types import (
    CatalogError,
    ColumnNode,
    ColumnType,
    DomainKnowledgeRecord,
    ExampleQuery,
    ExampleSource,
    JargonEntry,
    JoinEdge,
    NotFoundError,
    ProductArea,
    TableNode,
    table_key,
)

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

# search_examples spans two vector indexes (description text and query text),
# so one example retrieval costs two index lookups in the call ledger.
EXAMPLE_INDEX_LOOKUPS = 2

_TOKEN_RE = re.compile(r"[a-z0-9_]+")


@dataclass
class IngestSummary:
    tables: int = 0
    columns: int = 0
    product_areas: int = 0
    examples: int = 0
    knowledge: int = 0
    jargon: int = 0
    errors: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class Snapshot:
    """Immutable catalog state."""

    tables: dict[str, TableNode] = field(default_factory=dict)
    columns: dict[str, tuple[ColumnNode, ...]] = field(default_factory=dict)
    joins: tuple[JoinEdge, ...] = ()
    examples: dict[str, ExampleQuery] = field(default_factory=dict)
    knowledge: tuple[DomainKnowledgeRecord, ...] = ()
    jargon: dict[str, JargonEntry] = field(default_factory=dict)
    areas: dict[str, ProductArea] = field(default_factory=dict)
    cluster_model: ClusterModel | None = None
    user_clusters: UserClusterMap = field(default_factory=dict)
    table_embeddings: dict[str, np.ndarray] = field(default_factory=dict)
    schema_embeddings: dict[str, np.ndarray] = field(default_factory=dict)
    built_at: str = ""


class Catalog:
    """Thread-safe store over an immutable :class:`Snapshot`.

    Also implements the SQL analyzer's ``SchemaProvider`` protocol.
    """

    def __init__(self, embedder=None):
        from lakeql.retrieval.embedder import DeterministicEmbedder

        self.embedder = embedder or DeterministicEmbedder()
        self._snapshot = Snapshot()
        self._write_lock = threading.Lock()
        self._email_groups: dict[str, tuple[str, ...]] = {}

    @property
    def snapshot(self) -> Snapshot:
        return self._snapshot

    # --- SchemaProvider ---

    def has_table(self, key: str) -> bool:
        return key in self._snapshot.tables

    def columns_of(self, key: str) -> frozenset[str] | None:
        columns = self._snapshot.columns.get(key)
        if columns is None:
            return None
        return frozenset(c.column_name.lower() for c in columns)

    # --- ingest ---

    def ingest(self, document: dict) -> IngestSummary:
        """Load a catalog snapshot document (see ``docs/catalog-snapshot.md``).

        Replaces tables/columns/product areas; previously ingested usage,
        examples, knowledge, and jargon are retained. A column whose table is
        absent is a per-record error; the rest of the batch proceeds.
        """
        if not isinstance(document, dict):
            raise CatalogError("snapshot document must be a JSON object")
        summary = IngestSummary()
        tables: dict[str, TableNode] = {}
        for i, raw in enumerate(document.get("tables", [])):
            try:
                node = _table_from_json(raw, f"tables[{i}]")
            except CatalogError as exc:
                summary.errors.append(str(exc))
                continue
            tables[node.key] = node
            summary.tables += 1

        columns: dict[str, list[ColumnNode]] = {key: [] for key in tables}
        for i, raw in enumerate(document.get("columns", [])):
            try:
                node = _column_from_json(raw, f"columns[{i}]")
            except CatalogError as exc:
                summary.errors.append(str(exc))
                continue
            if node.parent_key not in tables:
                summary.errors.append(
                    f"columns[{i}]: table {node.parent_key} not in snapshot"
                )
                continue
            columns[node.parent_key].append(node)
            summary.columns += 1

        areas: dict[str, ProductArea] = {}
        for i, raw in enumerate(document.get("product_areas", [])):
            try:
                area = _area_from_json(raw, f"product_areas[{i}]")
            except CatalogError as exc:
                summary.errors.append(str(exc))
                continue
            areas[area.name] = area
            summary.product_areas += 1

        with self._write_lock:
            snap = self._snapshot
            new_examples = dict(snap.examples)
            for i, raw in enumerate(document.get("examples", [])):
                try:
                    example = self._example_from_json(raw, f"examples[{i}]", tables)
                except CatalogError as exc:
                    summary.errors.append(str(exc))
                    continue
                new_examples[example.id] = example
                summary.examples += 1
            new_knowledge = list(snap.knowledge)
            known_ids = {record.id for record in new_knowledge}
            for i, raw in enumerate(document.get("knowledge", [])):
                try:
                    record = _knowledge_from_json(raw, f"knowledge[{i}]")
                except CatalogError as exc:
                    summary.errors.append(str(exc))
                    continue
                if record.id not in known_ids:
                    new_knowledge.append(record)
                    known_ids.add(record.id)
                    summary.knowledge += 1
            new_jargon = dict(snap.jargon)
            for i, raw in enumerate(document.get("jargon", [])):
                try:
                    entry = _jargon_from_json(raw, f"jargon[{i}]")
                except CatalogError as exc:
                    summary.errors.append(str(exc))
                    continue
                new_jargon[entry.term.casefold()] = entry
                summary.jargon += 1

            ordered_tables = dict(sorted(tables.items()))
            ordered_columns = {
                key: _order_columns(columns[key]) for key in ordered_tables
            }
            self._snapshot = replace(
                snap,
                tables=ordered_tables,
                columns=ordered_columns,
                areas=dict(sorted(areas.items())) or snap.areas,
                examples=new_examples,
                knowledge=tuple(new_knowledge),
                jargon=new_jargon,
                table_embeddings=self._embed_tables(ordered_tables, ordered_columns),
                schema_embeddings=self._embed_schemas(ordered_tables, ordered_columns),
                built_at=_utcnow(),
            )
        return summary

    def apply_usage(self, stats: UsageStats) -> None:
        """Fold aggregated query-log statistics into node popularity and the
        join-edge index."""
        with self._write_lock:
            snap = self._snapshot
            tables = {
                key: replace(node, usage_popularity=stats.table_executions.get(key, 0))
                for key, node in snap.tables.items()
            }
            columns = {
                key: _order_columns([
                    replace(col, usage_popularity=stats.column_counts.get(col.key, 0))
                    for col in cols
                ])
                for key, cols in snap.columns.items()
            }
            joins = tuple(
                JoinEdge(left, right, stats.join_keys.get((left, right), ()), freq)
                for (left, right), freq in sorted(stats.join_frequencies.items())
            )
            self._snapshot = replace(
                snap, tables=tables, columns=columns, joins=joins, built_at=_utcnow()
            )

    def apply_clusters(
        self, model: ClusterModel, user_clusters: UserClusterMap
    ) -> None:
        """Attach cluster artifacts and stamp cluster ids onto table nodes."""
        membership: dict[str, set[str]] = {}
        for cluster_id, members in model.extended.items():
            for table in members:
                membership.setdefault(table, set()).add(cluster_id)
        with self._write_lock:
            snap = self._snapshot
            tables = {
                key: replace(node, cluster_ids=frozenset(membership.get(key, ())))
                for key, node in snap.tables.items()
            }
            area_clusters = self._area_cluster_ids(snap.areas, user_clusters)
            areas = {
                name: replace(area, cluster_ids=area_clusters.get(name, frozenset()))
                for name, area in snap.areas.items()
            }
            self._snapshot = replace(
                snap,
                tables=tables,
                areas=areas,
                cluster_model=model,
                user_clusters=dict(user_clusters),
                built_at=_utcnow(),
            )

    def set_email_groups(self, groups: dict[str, Sequence[str]]) -> None:
        self._email_groups = {k: tuple(v) for k, v in groups.items()}

    @property
    def email_groups(self) -> dict[str, tuple[str, ...]]:
        return self._email_groups

    def _area_cluster_ids(
        self, areas: dict[str, ProductArea], user_clusters: UserClusterMap
    ) -> dict[str, frozenset[str]]:
        from lakeql.clustering.pipeline import get_user_group_clusters

        result: dict[str, frozenset[str]] = {}
        for name, area in areas.items():
            members: set[str] = set()
            for group in area.email_groups:
                members.update(self.email_groups.get(group, ()))
            result[name] = frozenset(get_user_group_clusters(members, user_clusters))
        return result

    # --- retrieval ---

    def search_tables(
        self,
        query_vector: np.ndarray,
        candidate_filter: frozenset[str] | None = None,
        k: int = 10,
        use_schema_embeddings: bool = False,
    ) -> list[tuple[TableNode, float]]:
        """Cosine-ranked tables. Deprecated tables never appear; ties break by
        popularity desc then key asc."""
        if k < 1:
            raise ValueError("k must be >= 1")
        snap = self._snapshot
        vectors = snap.schema_embeddings if use_schema_embeddings else snap.table_embeddings
        scored: list[tuple[TableNode, float]] = []
        for key, node in snap.tables.items():
            if node.is_deprecated:
                continue
            if candidate_filter is not None and key not in candidate_filter:
                continue
            vec = vectors.get(key)
            if vec is None:
                continue
            scored.append((node, float(np.dot(query_vector, vec))))
        scored.sort(key=lambda pair: (-pair[1], -pair[0].usage_popularity, pair[0].key))
        return scored[:k]

    def search_examples(
        self,
        query_vector: np.ndarray,
        candidate_tables: frozenset[str],
        k: int = 5,
    ) -> list[tuple[ExampleQuery, float]]:
        """Cosine-ranked examples using at least one candidate table.

        Searches both vector indexes (description text and raw SQL text) and
        merges by best similarity; see ``EXAMPLE_INDEX_LOOKUPS``.
        """
        if k < 1:
            raise ValueError("k must be >= 1")
        scored: list[tuple[ExampleQuery, float]] = []
        for example in self._snapshot.examples.values():
            if not example.tables & candidate_tables:
                continue
            vectors = [
                vec for vec in (example.embedding, example.sql_embedding)
                if vec is not None
            ]
            if not vectors:
                continue
            best = max(float(np.dot(query_vector, vec)) for vec in vectors)
            scored.append((example, best))
        scored.sort(key=lambda pair: (-pair[1], pair[0].id))
        return scored[:k]

    def get_table(self, key: str) -> TableNode:
        node = self._snapshot.tables.get(key.lower())
        if node is None:
            raise NotFoundError(f"unknown table: {key}")
        return node

    def get_columns(self, key: str) -> list[ColumnNode]:
        """All columns of a table, popularity desc then name asc."""
        columns = self._snapshot.columns.get(key.lower())
        if columns is None:
            raise NotFoundError(f"unknown table: {key}")
        return list(columns)

    def get_common_joins(self, key: str, k: int = 5) -> list[JoinEdge]:
        if k < 1:
            raise ValueError("k must be >= 1")
        key = key.lower()
        if key not in self._snapshot.tables:
            raise NotFoundError(f"unknown table: {key}")
        edges = [edge for edge in self._snapshot.joins if key in edge.tables]
        edges.sort(key=lambda e: (-e.frequency, e.partner_of(key)))
        return edges[:k]

    def get_domain_knowledge(
        self,
        product_areas: Iterable[str] = (),
        tables: Iterable[str] | None = None,
        user: str | None = None,
    ) -> list[DomainKnowledgeRecord]:
        """Union of records matching any filter dimension, newest first."""
        area_filter = set(product_areas)
        table_filter = set(tables) if tables else set()
        if not (area_filter or table_filter or user):
            raise ValueError("at least one filter dimension is required")
        hits: list[DomainKnowledgeRecord] = []
        for record in self._snapshot.knowledge:
            if (
                (area_filter and record.product_areas & area_filter)
                or (table_filter and record.tables & table_filter)
                or (user and record.author == user)
            ):
                hits.append(record)
        hits.sort(key=lambda r: (r.created_at, r.id), reverse=True)
        return hits

    def match_jargon(self, question: str) -> list[tuple[str, str]]:
        """Whole-token, case-insensitive jargon matches; when terms overlap
        the longest one wins, and each term appears at most once."""
        question_tokens = [
            (m.group(0).lower(), m.start(), m.end())
            for m in _TOKEN_RE.finditer(question.lower())
        ]
        terms = sorted(
            self._snapshot.jargon.values(),
            key=lambda entry: (-len(_TOKEN_RE.findall(entry.term.lower())), entry.term.lower()),
        )
        claimed: set[int] = set()
        matched: list[tuple[str, str]] = []
        for entry in terms:
            tokens = _TOKEN_RE.findall(entry.term.lower())
            if not tokens:
                continue
            for start in range(len(question_tokens) - len(tokens) + 1):
                window = question_tokens[start:start + len(tokens)]
                if [w[0] for w in window] != tokens:
                    continue
                positions = set(range(start, start + len(tokens)))
                if positions & claimed:
                    continue
                claimed.update(positions)
                matched.append((entry.term, entry.explanation))
                break
        matched.sort(key=lambda pair: pair[0].casefold())
        return matched

    # --- writes from the chat surface ---

    def add_knowledge(self, record: DomainKnowledgeRecord) -> str:
        with self._write_lock:
            snap = self._snapshot
            if any(existing.id == record.id for existing in snap.knowledge):
                raise CatalogError(f"knowledge id already exists: {record.id}")
            self._snapshot = replace(
                snap, knowledge=snap.knowledge + (record,), built_at=_utcnow()
            )
        return record.id

    def certify_example(
        self,
        sql: str,
        description: str,
        author: str,
        tables: Iterable[str] | None = None,
        default_database: str = "default",
    ) -> ExampleQuery:
        """Register a user-certified example. The table set always comes from
        SQL extraction; a caller-supplied set is only checked for drift."""
        try:
            query = parse(sql)
        except SqlSyntaxError as exc:
            raise CatalogError(f"example SQL does not parse: {exc.message}") from exc
        refs = extract_refs(query, self, default_database, strict=False)
        if not refs.tables:
            raise CatalogError("example must reference at least one table")
        if tables is not None and set(tables) != set(refs.tables):
            logger.warning(
                "certify_example: declared tables %s differ from extracted %s",
                sorted(tables), sorted(refs.tables),
            )
        example = ExampleQuery(
            id="ex-" + hashlib.sha256((sql + "\n" + description).encode()).hexdigest()[:12],
            sql=sql,
            description=description,
            source=ExampleSource.USER_CERTIFIED,
            tables=frozenset(refs.tables),
            author=author,
            is_certified=True,
            created_at=datetime.now(tz=timezone.utc),
            embedding=self.embedder.embed_one(f"{description}\n{sql}"),
            sql_embedding=self.embedder.embed_one(sql),
        )
        with self._write_lock:
            snap = self._snapshot
            examples = dict(snap.examples)
            examples[example.id] = example
            self._snapshot = replace(snap, examples=examples, built_at=_utcnow())
        return example

    # --- embedding text assembly ---

    def table_embedding_text(self, node: TableNode) -> str:
        tags = ", ".join(sorted(node.tags))
        return f"{node.key} | {node.description or ''} | tags: {tags}"

    def schema_embedding_text(
        self, node: TableNode, columns: Sequence[ColumnNode]
    ) -> str:
        rendered = ", ".join(f"{c.column_name} {c.data_type}" for c in columns)
        return f"{node.key} columns: {rendered}"

    def _embed_tables(
        self,
        tables: dict[str, TableNode],
        columns: dict[str, tuple[ColumnNode, ...]],
    ) -> dict[str, np.ndarray]:
        return {
            key: self.embedder.embed_one(self.table_embedding_text(node))
            for key, node in tables.items()
        }

    def _embed_schemas(
        self,
        tables: dict[str, TableNode],
        columns: dict[str, tuple[ColumnNode, ...]],
    ) -> dict[str, np.ndarray]:
        return {
            key: self.embedder.embed_one(
                self.schema_embedding_text(node, columns.get(key, ()))
            )
            for key, node in tables.items()
        }

    def _example_from_json(
        self, raw: dict, path: str, tables: dict[str, TableNode]
    ) -> ExampleQuery:
        sql = _require(raw, "sql", path)
        description = _require(raw, "description", path)
        try:
            query = parse(sql)
            refs = extract_refs(query, self, "default", strict=False)
            extracted = frozenset(refs.tables)
        except SqlSyntaxError as exc:
            raise CatalogError(f"{path}: example SQL does not parse: {exc.message}")
        embedding = raw.get("embedding")
        sql_embedding = raw.get("sql_embedding")
        return ExampleQuery(
            id=raw.get("id") or "ex-" + hashlib.sha256(sql.encode()).hexdigest()[:12],
            sql=sql,
            description=description,
            source=ExampleSource(raw.get("source", "wiki")),
            tables=extracted,
            author=raw.get("author"),
            is_certified=bool(raw.get("is_certified", False)),
            created_at=_parse_ts(raw.get("created_at")),
            embedding=(
                np.asarray(embedding, dtype=np.float64)
                if embedding is not None
                else self.embedder.embed_one(f"{description}\n{sql}")
            ),
            sql_embedding=(
                np.asarray(sql_embedding, dtype=np.float64)
                if sql_embedding is not None
                else self.embedder.embed_one(sql)
            ),
        )


# --- JSON decoding helpers ---------------------------------------------------

def _require(raw: dict, key: str, path: str):
    if key not in raw or raw[key] in (None, ""):
        raise CatalogError(f"{path}.{key}: missing or empty")
    return raw[key]


def _parse_ts(value) -> datetime:
    if value is None:
        return datetime.fromtimestamp(0, tz=timezone.utc)
    ts = datetime.fromisoformat(value)
    return ts if ts.tzinfo else ts.replace(tzinfo=timezone.utc)


def _order_columns(columns: list[ColumnNode]) -> tuple[ColumnNode, ...]:
    return tuple(sorted(columns, key=lambda c: (-c.usage_popularity, c.column_name)))


def _table_from_json(raw: dict, path: str) -> TableNode:
    if not isinstance(raw, dict):
        raise CatalogError(f"{path}: expected an object")
    try:
        return TableNode(
            database_name=str(_require(raw, "database_name", path)).lower(),
            table_name=str(_require(raw, "table_name", path)).lower(),
            human_description=raw.get("human_description"),
            ai_description=raw.get("ai_description"),
            usage_popularity=int(raw.get("usage_popularity", 0)),
            cluster_ids=frozenset(raw.get("cluster_ids", ())),
            tags=frozenset(raw.get("tags", ())),
            is_certified=bool(raw.get("is_certified", False)),
            is_deprecated=bool(raw.get("is_deprecated", False)),
        )
    except CatalogError:
        raise
    except (TypeError, ValueError) as exc:
        raise CatalogError(f"{path}: {exc}")


def _column_from_json(raw: dict, path: str) -> ColumnNode:
    if not isinstance(raw, dict):
        raise CatalogError(f"{path}: expected an object")
    try:
        return ColumnNode(
            database_name=str(_require(raw, "database_name", path)).lower(),
            table_name=str(_require(raw, "table_name", path)).lower(),
            column_name=str(_require(raw, "column_name", path)).lower(),
            human_description=raw.get("human_description"),
            ai_description=raw.get("ai_description"),
            usage_popularity=int(raw.get("usage_popularity", 0)),
            top_values=tuple(str(v) for v in raw.get("top_values", ())),
            data_type=str(raw.get("data_type", "varchar")),
            column_type=ColumnType(raw.get("column_type", "unknown")),
            is_partition_key=bool(raw.get("is_partition_key", False)),
        )
    except CatalogError:
        raise
    except (TypeError, ValueError) as exc:
        raise CatalogError(f"{path}: {exc}")


def _area_from_json(raw: dict, path: str) -> ProductArea:
    if not isinstance(raw, dict):
        raise CatalogError(f"{path}: expected an object")
    return ProductArea(
        name=str(_require(raw, "name", path)),
        email_groups=frozenset(raw.get("email_groups", ())),
        explicit_tables=frozenset(k.lower() for k in raw.get("explicit_tables", ())),
        cluster_ids=frozenset(raw.get("cluster_ids", ())),
    )


def _knowledge_from_json(raw: dict, path: str) -> DomainKnowledgeRecord:
    if not isinstance(raw, dict):
        raise CatalogError(f"{path}: expected an object")
    try:
        return DomainKnowledgeRecord(
            id=str(_require(raw, "id", path)),
            text=str(_require(raw, "text", path)),
            product_areas=frozenset(raw.get("product_areas", ())),
            tables=frozenset(k.lower() for k in raw.get("tables", ())),
            columns=frozenset(k.lower() for k in raw.get("columns", ())),
            author=raw.get("author"),
            created_at=_parse_ts(raw.get("created_at")),
        )
    except CatalogError:
        raise
    except (TypeError, ValueError) as exc:
        raise CatalogError(f"{path}: {exc}")


def _jargon_from_json(raw: dict, path: str) -> JargonEntry:
    if not isinstance(raw, dict):
        raise CatalogError(f"{path}: expected an object")
    return JargonEntry(
        term=str(_require(raw, "term", path)),
        explanation=str(_require(raw, "explanation", path)),
    )


def _utcnow() -> str:
    return datetime.now(tz=timezone.utc).isoformat()

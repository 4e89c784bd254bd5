"""Query-log mining: popularity, unique users, column counts, join edges.

Log entries are ``{sql, user, ts, success}``. Only successful, in-window,
parseable queries are aggregated; unparseable entries go to a skipped tally.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime
from typing import Iterable, Iterator

from lakeql.clustering.matrix import AccessMatrix

from .errors import SqlSyntaxError
from .parser import parse
from .refs import EmptySchema, QueryRefs, SchemaProvider, resolve


@dataclass(frozen=True)
class QueryLogEntry:
    sql: str
    user: str
    ts: datetime
    success: bool
    # Optional pre-extracted references for logs whose SQL cannot be parsed
    # locally (e.g. exported from an engine's own query plans). When set,
    # they take the place of parsing.
    refs: QueryRefs | None = None

    @classmethod
    def from_json(cls, line: str) -> "QueryLogEntry":
        raw = json.loads(line)
        refs = None
        if "refs" in raw and raw["refs"] is not None:
            pre = raw["refs"]
            refs = QueryRefs(
                frozenset(t.lower() for t in pre.get("tables", ())),
                frozenset(c.lower() for c in pre.get("columns", ())),
                tuple((l.lower(), r.lower()) for l, r in pre.get("join_conditions", ())),
            )
        return cls(
            sql=raw.get("sql", ""),
            user=raw["user"],
            ts=datetime.fromisoformat(raw["ts"]),
            success=bool(raw["success"]),
            refs=refs,
        )


@dataclass(frozen=True)
class Window:
    """Observation window: inclusive start, exclusive end; None = unbounded."""

    start: datetime | None = None
    end: datetime | None = None

    def contains(self, ts: datetime) -> bool:
        if self.start is not None and ts < self.start:
            return False
        if self.end is not None and ts >= self.end:
            return False
        return True


@dataclass
class UsageStats:
    table_executions: dict[str, int] = field(default_factory=dict)
    table_unique_users: dict[str, int] = field(default_factory=dict)
    column_counts: dict[str, int] = field(default_factory=dict)
    join_frequencies: dict[tuple[str, str], int] = field(default_factory=dict)
    join_keys: dict[tuple[str, str], tuple[tuple[str, str], ...]] = field(default_factory=dict)
    table_user_counts: dict[tuple[str, str], int] = field(default_factory=dict)
    window: Window = field(default_factory=Window)
    skipped: int = 0

    def __post_init__(self):
        for table, unique in self.table_unique_users.items():
            if unique > self.table_executions.get(table, 0):
                raise ValueError(f"unique users exceed executions for {table}")


def aggregate_usage(
    entries: Iterable[QueryLogEntry],
    schema: SchemaProvider | None = None,
    window: Window | None = None,
    default_database: str = "default",
) -> UsageStats:
    """Aggregate a query log into usage statistics.

    Order-independent: permuting the input yields an equal result.
    """
    schema = schema or EmptySchema()
    window = window or Window()
    stats = UsageStats(window=window)
    table_users: dict[str, set[str]] = {}
    join_key_sets: dict[tuple[str, str], set[tuple[str, str]]] = {}

    for entry in entries:
        if not entry.success or not window.contains(entry.ts):
            continue
        if entry.refs is not None:
            refs = entry.refs
        else:
            try:
                query = parse(entry.sql)
            except SqlSyntaxError:
                stats.skipped += 1
                continue
            refs = resolve(query, schema, default_database, strict=False).to_query_refs()
        for table in refs.tables:
            stats.table_executions[table] = stats.table_executions.get(table, 0) + 1
            table_users.setdefault(table, set()).add(entry.user)
            pair = (table, entry.user)
            stats.table_user_counts[pair] = stats.table_user_counts.get(pair, 0) + 1
        for column in refs.columns:
            stats.column_counts[column] = stats.column_counts.get(column, 0) + 1
        for edge, key_pair in _canonical_edges(refs.join_conditions):
            stats.join_frequencies[edge] = stats.join_frequencies.get(edge, 0) + 1
            join_key_sets.setdefault(edge, set()).update(key_pair)

    stats.table_unique_users = {t: len(users) for t, users in table_users.items()}
    stats.join_keys = {
        edge: tuple(sorted(pairs)) for edge, pairs in join_key_sets.items()
    }
    return stats


def _canonical_edges(
    join_conditions: tuple[tuple[str, str], ...],
) -> Iterator[tuple[tuple[str, str], set[tuple[str, str]]]]:
    """Canonicalize join pairs: edge tables ordered lexicographically, one
    edge per table pair per query regardless of how many key equalities."""
    per_edge: dict[tuple[str, str], set[tuple[str, str]]] = {}
    for left_key, right_key in join_conditions:
        left_table, left_col = left_key.rsplit(".", 1)
        right_table, right_col = right_key.rsplit(".", 1)
        if left_table <= right_table:
            edge = (left_table, right_table)
            pair = (left_col, right_col)
        else:
            edge = (right_table, left_table)
            pair = (right_col, left_col)
        per_edge.setdefault(edge, set()).add(pair)
    yield from per_edge.items()


def build_access_matrix(
    source: UsageStats | Iterable[QueryLogEntry],
    schema: SchemaProvider | None = None,
    window: Window | None = None,
    default_database: str = "default",
) -> AccessMatrix:
    """User-by-table access counts from aggregated stats or a raw log."""
    if isinstance(source, UsageStats):
        stats = source
    else:
        stats = aggregate_usage(source, schema, window, default_database)
    return AccessMatrix.from_pairs(stats.table_user_counts)


def load_query_log(path) -> list[QueryLogEntry]:
    """Read a query-log NDJSON file."""
    entries = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line:
                entries.append(QueryLogEntry.from_json(line))
    return entries

"""Knowledge-graph entity types.

Keys are lowercase: tables as ``db.table``, columns as ``db.table.column``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum

import numpy as np


def table_key(database_name: str, table_name: str) -> str:
    return f"{database_name.lower()}.{table_name.lower()}"


def column_key(database_name: str, table_name: str, column_name: str) -> str:
    return f"{database_name.lower()}.{table_name.lower()}.{column_name.lower()}"


class CatalogError(Exception):
    """Invalid entity or malformed snapshot document."""


class NotFoundError(KeyError):
    """Entity key absent from the catalog."""


class ColumnType(Enum):
    METRIC = "metric"
    DIMENSION = "dimension"
    ATTRIBUTE = "attribute"
    UNKNOWN = "unknown"


class ExampleSource(Enum):
    WIKI = "wiki"
    CODE_REPO = "code_repo"
    USER_CERTIFIED = "user_certified"


@dataclass(frozen=True)
class TableNode:
    database_name: str
    table_name: str
    human_description: str | None = None
    ai_description: str | None = None
    usage_popularity: int = 0
    cluster_ids: frozenset[str] = frozenset()
    tags: frozenset[str] = frozenset()
    is_certified: bool = False
    is_deprecated: bool = False

    def __post_init__(self):
        if not self.database_name or not self.table_name:
            raise CatalogError("table requires non-empty database and table names")
        if self.usage_popularity < 0:
            raise CatalogError(f"negative popularity for {self.key}")
        if self.is_deprecated and self.is_certified:
            raise CatalogError(f"deprecated table {self.key} cannot be certified")

    @property
    def key(self) -> str:
        return table_key(self.database_name, self.table_name)

    @property
    def description(self) -> str | None:
        return self.human_description or self.ai_description


@dataclass(frozen=True)
class ColumnNode:
    database_name: str
    table_name: str
    column_name: str
    human_description: str | None = None
    ai_description: str | None = None
    usage_popularity: int = 0
    top_values: tuple[str, ...] = ()
    data_type: str = "varchar"
    column_type: ColumnType = ColumnType.UNKNOWN
    is_partition_key: bool = False

    def __post_init__(self):
        if not self.column_name:
            raise CatalogError("column requires a non-empty name")
        if self.usage_popularity < 0:
            raise CatalogError(f"negative popularity for {self.key}")
        if len(self.top_values) > 10:
            object.__setattr__(self, "top_values", self.top_values[:10])

    @property
    def key(self) -> str:
        return column_key(self.database_name, self.table_name, self.column_name)

    @property
    def parent_key(self) -> str:
        return table_key(self.database_name, self.table_name)

    @property
    def description(self) -> str | None:
        return self.human_description or self.ai_description


@dataclass(frozen=True)
class JoinEdge:
    """Canonical join edge: table keys ordered lexicographically."""

    left_table: str
    right_table: str
    join_keys: tuple[tuple[str, str], ...]
    frequency: int

    def __post_init__(self):
        if self.frequency < 1:
            raise CatalogError("join frequency must be >= 1")
        if self.left_table > self.right_table:
            left, right = self.right_table, self.left_table
            object.__setattr__(self, "left_table", left)
            object.__setattr__(self, "right_table", right)
            object.__setattr__(
                self, "join_keys", tuple((r, l) for l, r in self.join_keys)
            )

    @property
    def tables(self) -> tuple[str, str]:
        return (self.left_table, self.right_table)

    def partner_of(self, key: str) -> str:
        return self.right_table if key == self.left_table else self.left_table


@dataclass(frozen=True)
class ExampleQuery:
    id: str
    sql: str
    description: str
    source: ExampleSource
    tables: frozenset[str]
    author: str | None = None
    is_certified: bool = False
    created_at: datetime = field(
        default_factory=lambda: datetime.fromtimestamp(0, tz=timezone.utc)
    )
    embedding: np.ndarray | None = None  # description embedding, unit norm
    sql_embedding: np.ndarray | None = None  # query text embedding, unit norm

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ExampleQuery):
            return NotImplemented
        return (
            self.id == other.id
            and self.sql == other.sql
            and self.description == other.description
            and self.source == other.source
            and self.tables == other.tables
            and self.author == other.author
            and self.is_certified == other.is_certified
            and self.created_at == other.created_at
            and _array_eq(self.embedding, other.embedding)
            and _array_eq(self.sql_embedding, other.sql_embedding)
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class DomainKnowledgeRecord:
    id: str
    text: str
    product_areas: frozenset[str] = frozenset()
    tables: frozenset[str] = frozenset()
    columns: frozenset[str] = frozenset()
    author: str | None = None
    created_at: datetime = field(
        default_factory=lambda: datetime.fromtimestamp(0, tz=timezone.utc)
    )

    def __post_init__(self):
        if not (self.product_areas or self.tables or self.columns or self.author):
            raise CatalogError(
                "knowledge record needs at least one scope: "
                "product area, table, column, or author"
            )


@dataclass(frozen=True)
class JargonEntry:
    term: str
    explanation: str

    def __post_init__(self):
        if not self.term.strip():
            raise CatalogError("jargon term must be non-empty")


@dataclass(frozen=True)
class ProductArea:
    name: str
    email_groups: frozenset[str] = frozenset()
    explicit_tables: frozenset[str] = frozenset()
    cluster_ids: frozenset[str] = frozenset()

    def __post_init__(self):
        if not self.name:
            raise CatalogError("product area requires a name")


def _array_eq(a: np.ndarray | None, b: np.ndarray | None) -> bool:
    if a is None or b is None:
        return a is None and b is None
    return np.array_equal(a, b)

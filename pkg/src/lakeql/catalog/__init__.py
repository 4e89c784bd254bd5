"""Knowledge-graph catalog: entities, store, and NDJSON persistence."""

from .persistence import load_catalog, save_catalog
from .store import Catalog, IngestSummary, Snapshot, EXAMPLE_INDEX_LOOKUPS
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
    column_key,
    table_key,
)

__all__ = [
    "Catalog",
    "CatalogError",
    "ColumnNode",
    "ColumnType",
    "DomainKnowledgeRecord",
    "EXAMPLE_INDEX_LOOKUPS",
    "ExampleQuery",
    "ExampleSource",
    "IngestSummary",
    "JargonEntry",
    "JoinEdge",
    "NotFoundError",
    "ProductArea",
    "Snapshot",
    "TableNode",
    "column_key",
    "load_catalog",
    "save_catalog",
    "table_key",
]

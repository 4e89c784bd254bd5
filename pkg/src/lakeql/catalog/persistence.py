"""NDJSON persistence for the catalog: one file per index plus a manifest.

The format is diffable and trivially regenerable; loading a saved directory
reproduces the catalog entity-by-entity.
"""

from __future__ import annotations

import json
from dataclasses import replace
from pathlib import Path

import numpy as np

from lakeql.clustering.pipeline import (
    load_cluster_artifacts,
    save_cluster_artifacts,
)

from .store import Catalog, Snapshot, SCHEMA_VERSION, _order_columns, _parse_ts
from .types import (
    ColumnNode,
    ColumnType,
    DomainKnowledgeRecord,
    ExampleQuery,
    ExampleSource,
    JargonEntry,
    JoinEdge,
    ProductArea,
    TableNode,
)

INDEX_FILES = (
    "tables.ndjson",
    "columns.ndjson",
    "usage.ndjson",
    "joins.ndjson",
    "examples.ndjson",
    "knowledge.ndjson",
    "jargon.ndjson",
    "clusters.ndjson",
)


def save_catalog(catalog: Catalog, directory: str | Path) -> dict:
    """Write all indexes and ``manifest.json``; returns the manifest."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    snap = catalog.snapshot

    def dump(name: str, rows) -> None:
        with open(directory / name, "w", encoding="utf-8") as handle:
            for row in rows:
                handle.write(json.dumps(row, sort_keys=True) + "\n")

    dump("tables.ndjson", (_table_row(t) for t in snap.tables.values()))
    dump("columns.ndjson", (
        _column_row(c) for cols in snap.columns.values() for c in cols
    ))
    dump("usage.ndjson", (
        {
            "table": key,
            "total_executions": node.usage_popularity,
        }
        for key, node in snap.tables.items()
    ))
    dump("joins.ndjson", (_join_row(j) for j in snap.joins))
    dump("examples.ndjson", (_example_row(e) for e in snap.examples.values()))
    dump("knowledge.ndjson", (_knowledge_row(r) for r in snap.knowledge))
    dump("jargon.ndjson", (
        {"term": j.term, "explanation": j.explanation}
        for j in snap.jargon.values()
    ))
    dump("areas.ndjson", (_area_row(a) for a in snap.areas.values()))
    if snap.cluster_model is not None:
        save_cluster_artifacts(directory, snap.cluster_model, snap.user_clusters)
    else:
        (directory / "clusters.ndjson").write_text("", encoding="utf-8")
    dump("embeddings.ndjson", (
        {
            "table": key,
            "attributes": snap.table_embeddings[key].tolist(),
            "schema": snap.schema_embeddings[key].tolist(),
        }
        for key in snap.tables
    ))
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "built_at": snap.built_at,
        "embedder": catalog.embedder.name,
        "counts": {
            "tables": len(snap.tables),
            "columns": sum(len(c) for c in snap.columns.values()),
            "joins": len(snap.joins),
            "examples": len(snap.examples),
            "knowledge": len(snap.knowledge),
            "jargon": len(snap.jargon),
            "product_areas": len(snap.areas),
            "clusters": len(snap.cluster_model.cluster_ids) if snap.cluster_model else 0,
        },
    }
    with open(directory / "manifest.json", "w", encoding="utf-8") as handle:
        json.dump(manifest, handle, indent=2, sort_keys=True)
        handle.write("\n")
    return manifest


def load_catalog(directory: str | Path, embedder=None) -> Catalog:
    """Reconstruct a catalog saved by :func:`save_catalog`."""
    directory = Path(directory)
    manifest_path = directory / "manifest.json"
    if not manifest_path.exists():
        raise FileNotFoundError(f"no manifest.json in {directory}")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    if manifest.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(
            f"unsupported catalog schema version: {manifest.get('schema_version')}"
        )

    catalog = Catalog(embedder=embedder)

    def rows(name: str):
        path = directory / name
        if not path.exists():
            return
        with open(path, encoding="utf-8") as handle:
            for line in handle:
                line = line.strip()
                if line:
                    yield json.loads(line)

    tables: dict[str, TableNode] = {}
    for raw in rows("tables.ndjson"):
        node = _table_from_row(raw)
        tables[node.key] = node
    columns: dict[str, list[ColumnNode]] = {key: [] for key in tables}
    for raw in rows("columns.ndjson"):
        node = _column_from_row(raw)
        columns.setdefault(node.parent_key, []).append(node)
    joins = tuple(_join_from_row(raw) for raw in rows("joins.ndjson"))
    examples = {}
    for raw in rows("examples.ndjson"):
        example = _example_from_row(raw)
        examples[example.id] = example
    knowledge = tuple(_knowledge_from_row(raw) for raw in rows("knowledge.ndjson"))
    jargon = {
        raw["term"].casefold(): JargonEntry(raw["term"], raw["explanation"])
        for raw in rows("jargon.ndjson")
    }
    areas = {raw["name"]: _area_from_row(raw) for raw in rows("areas.ndjson")}

    table_embeddings: dict[str, np.ndarray] = {}
    schema_embeddings: dict[str, np.ndarray] = {}
    for raw in rows("embeddings.ndjson"):
        table_embeddings[raw["table"]] = np.asarray(raw["attributes"], dtype=np.float64)
        schema_embeddings[raw["table"]] = np.asarray(raw["schema"], dtype=np.float64)

    cluster_model = None
    user_clusters = {}
    if (directory / "clusters.ndjson").read_text(encoding="utf-8").strip():
        cluster_model, user_clusters = load_cluster_artifacts(directory)

    catalog._snapshot = Snapshot(
        tables=dict(sorted(tables.items())),
        columns={k: _order_columns(v) for k, v in sorted(columns.items())},
        joins=joins,
        examples=examples,
        knowledge=knowledge,
        jargon=jargon,
        areas=dict(sorted(areas.items())),
        cluster_model=cluster_model,
        user_clusters=user_clusters,
        table_embeddings=table_embeddings,
        schema_embeddings=schema_embeddings,
        built_at=manifest.get("built_at", ""),
    )
    return catalog


# --- row codecs ---------------------------------------------------------------

def _table_row(node: TableNode) -> dict:
    return {
        "database_name": node.database_name,
        "table_name": node.table_name,
        "human_description": node.human_description,
        "ai_description": node.ai_description,
        "usage_popularity": node.usage_popularity,
        "cluster_ids": sorted(node.cluster_ids),
        "tags": sorted(node.tags),
        "is_certified": node.is_certified,
        "is_deprecated": node.is_deprecated,
    }


def _table_from_row(raw: dict) -> TableNode:
    return TableNode(
        database_name=raw["database_name"],
        table_name=raw["table_name"],
        human_description=raw.get("human_description"),
        ai_description=raw.get("ai_description"),
        usage_popularity=int(raw.get("usage_popularity", 0)),
        cluster_ids=frozenset(raw.get("cluster_ids", ())),
        tags=frozenset(raw.get("tags", ())),
        is_certified=bool(raw.get("is_certified", False)),
        is_deprecated=bool(raw.get("is_deprecated", False)),
    )


def _column_row(node: ColumnNode) -> dict:
    return {
        "database_name": node.database_name,
        "table_name": node.table_name,
        "column_name": node.column_name,
        "human_description": node.human_description,
        "ai_description": node.ai_description,
        "usage_popularity": node.usage_popularity,
        "top_values": list(node.top_values),
        "data_type": node.data_type,
        "column_type": node.column_type.value,
        "is_partition_key": node.is_partition_key,
    }


def _column_from_row(raw: dict) -> ColumnNode:
    return ColumnNode(
        database_name=raw["database_name"],
        table_name=raw["table_name"],
        column_name=raw["column_name"],
        human_description=raw.get("human_description"),
        ai_description=raw.get("ai_description"),
        usage_popularity=int(raw.get("usage_popularity", 0)),
        top_values=tuple(raw.get("top_values", ())),
        data_type=raw.get("data_type", "varchar"),
        column_type=ColumnType(raw.get("column_type", "unknown")),
        is_partition_key=bool(raw.get("is_partition_key", False)),
    )


def _join_row(edge: JoinEdge) -> dict:
    return {
        "left_table": edge.left_table,
        "right_table": edge.right_table,
        "join_keys": [list(pair) for pair in edge.join_keys],
        "frequency": edge.frequency,
    }


def _join_from_row(raw: dict) -> JoinEdge:
    return JoinEdge(
        left_table=raw["left_table"],
        right_table=raw["right_table"],
        join_keys=tuple((l, r) for l, r in raw.get("join_keys", ())),
        frequency=int(raw["frequency"]),
    )


def _example_row(example: ExampleQuery) -> dict:
    return {
        "id": example.id,
        "sql": example.sql,
        "description": example.description,
        "source": example.source.value,
        "tables": sorted(example.tables),
        "author": example.author,
        "is_certified": example.is_certified,
        "created_at": example.created_at.isoformat(),
        "embedding": example.embedding.tolist() if example.embedding is not None else None,
        "sql_embedding": (
            example.sql_embedding.tolist() if example.sql_embedding is not None else None
        ),
    }


def _example_from_row(raw: dict) -> ExampleQuery:
    return ExampleQuery(
        id=raw["id"],
        sql=raw["sql"],
        description=raw["description"],
        source=ExampleSource(raw["source"]),
        tables=frozenset(raw["tables"]),
        author=raw.get("author"),
        is_certified=bool(raw.get("is_certified", False)),
        created_at=_parse_ts(raw.get("created_at")),
        embedding=(
            np.asarray(raw["embedding"], dtype=np.float64)
            if raw.get("embedding") is not None else None
        ),
        sql_embedding=(
            np.asarray(raw["sql_embedding"], dtype=np.float64)
            if raw.get("sql_embedding") is not None else None
        ),
    )


def _knowledge_row(record: DomainKnowledgeRecord) -> dict:
    return {
        "id": record.id,
        "text": record.text,
        "product_areas": sorted(record.product_areas),
        "tables": sorted(record.tables),
        "columns": sorted(record.columns),
        "author": record.author,
        "created_at": record.created_at.isoformat(),
    }


def _knowledge_from_row(raw: dict) -> DomainKnowledgeRecord:
    return DomainKnowledgeRecord(
        id=raw["id"],
        text=raw["text"],
        product_areas=frozenset(raw.get("product_areas", ())),
        tables=frozenset(raw.get("tables", ())),
        columns=frozenset(raw.get("columns", ())),
        author=raw.get("author"),
        created_at=_parse_ts(raw.get("created_at")),
    )


def _area_row(area: ProductArea) -> dict:
    return {
        "name": area.name,
        "email_groups": sorted(area.email_groups),
        "explicit_tables": sorted(area.explicit_tables),
        "cluster_ids": sorted(area.cluster_ids),
    }


def _area_from_row(raw: dict) -> ProductArea:
    return ProductArea(
        name=raw["name"],
        email_groups=frozenset(raw.get("email_groups", ())),
        explicit_tables=frozenset(raw.get("explicit_tables", ())),
        cluster_ids=frozenset(raw.get("cluster_ids", ())),
    )

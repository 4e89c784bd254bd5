"""Versioned prompt templates and the ingredient blocks that fill them.

Templates are plain text package assets with ``${name}`` placeholders; the
first ``# version:`` line is stripped at load and tracked so golden tests
pin (template version, rendered bytes) together. Assembly is a pure
function of (context, switches), so rendered prompts are byte-stable.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass
from string import Template

from lakeql.catalog.types import ColumnNode, TableNode
from lakeql.config import EngineConfig
from lakeql.retrieval.context import RetrievedContext

_NONE = "(none)"


@dataclass(frozen=True)
class PromptTemplate:
    name: str
    version: str
    body: Template

    def render(self, **values: str) -> str:
        return self.body.substitute(**values)


_cache: dict[str, PromptTemplate] = {}


def load_template(name: str) -> PromptTemplate:
    if name not in _cache:
        text = (
            importlib.resources.files("lakeql.prompts")
            .joinpath(f"{name}.txt")
            .read_text(encoding="utf-8")
        )
        version = "0"
        lines = text.splitlines()
        if lines and lines[0].startswith("# version:"):
            version = lines[0].split(":", 1)[1].strip()
            text = "\n".join(lines[1:]).lstrip("\n")
        _cache[name] = PromptTemplate(name, version, Template(text))
    return _cache[name]


def load_asset(name: str) -> str:
    return (
        importlib.resources.files("lakeql.prompts")
        .joinpath(f"{name}.txt")
        .read_text(encoding="utf-8")
    )


# --- ingredient blocks -------------------------------------------------------

def render_schema(
    table: TableNode,
    columns: list[ColumnNode],
    include_attributes: bool = True,
    popularity_order: bool = True,
) -> str:
    """Deterministic CREATE TABLE rendering with extended column comments
    assembled from the catalog attributes."""
    ordered = sorted(
        columns,
        key=(
            (lambda c: (-c.usage_popularity, c.column_name))
            if popularity_order
            else (lambda c: c.column_name)
        ),
    )
    lines = [f"CREATE TABLE {table.key} ("]
    for i, column in enumerate(ordered):
        comma = "," if i < len(ordered) - 1 else ""
        line = f"  {column.column_name} {column.data_type}{comma}"
        if include_attributes:
            parts = []
            if column.description:
                parts.append(column.description)
            if column.column_type.value != "unknown":
                parts.append(column.column_type.value)
            if column.top_values:
                parts.append("top values: " + ", ".join(column.top_values[:3]))
            if column.is_partition_key:
                parts.append("partition key")
            if parts:
                line += " -- " + " | ".join(parts)
        lines.append(line)
    lines.append(")")
    if include_attributes and table.description:
        lines.append(f"-- {table.description}")
    return "\n".join(lines)


def tables_block(ctx: RetrievedContext, config: EngineConfig, catalog) -> str:
    """Table list for the ranker: names, descriptions, popularity, common
    joins, certification; deliberately no schemas."""
    switches = config.knowledge
    lines = []
    for retrieved in ctx.tables:
        node = retrieved.node
        bits = [f"- {node.key}"]
        if switches.popularity_joins:
            bits.append(f"(popularity {node.usage_popularity})")
        if switches.table_column_attributes:
            if node.description:
                bits.append(f": {node.description}")
            if node.tags:
                bits.append(f"[tags: {', '.join(sorted(node.tags))}]")
            if node.is_certified:
                bits.append("[certified]")
            if node.is_deprecated:
                bits.append("[deprecated]")
        line = " ".join(bits)
        if switches.popularity_joins:
            joins = catalog.get_common_joins(node.key, config.common_joins_k)
            if joins:
                partners = ", ".join(edge.partner_of(node.key) for edge in joins)
                line += f" | commonly joined: {partners}"
        lines.append(line)
    return "\n".join(lines) if lines else _NONE


def examples_block(ctx: RetrievedContext) -> str:
    lines = []
    for i, example in enumerate(ctx.examples, 1):
        lines.append(f"Example {i}: {example.description}\nSQL: {example.sql}")
    return "\n".join(lines) if lines else _NONE


def knowledge_block(ctx: RetrievedContext) -> str:
    lines = [f"- {record.text}" for record in ctx.knowledge]
    return "\n".join(lines) if lines else _NONE


def jargon_block(ctx: RetrievedContext) -> str:
    lines = [f"- {term}: {explanation}" for term, explanation in ctx.jargon]
    return "\n".join(lines) if lines else _NONE


def schemas_block(
    table_keys: list[str],
    ctx: RetrievedContext,
    config: EngineConfig,
    ranked_columns=None,
) -> str:
    """CREATE TABLE renderings for the given tables; when a column ranking is
    provided, only ranked columns (both tiers) are rendered."""
    switches = config.knowledge
    parts = []
    by_key = {t.node.key: t.node for t in ctx.tables}
    for key in table_keys:
        node = by_key.get(key)
        if node is None:
            continue
        columns = ctx.columns.get(key, [])
        if ranked_columns is not None:
            keep = ranked_columns.all_columns(key)
            if keep:
                columns = [c for c in columns if c.column_name in keep]
        parts.append(render_schema(
            node,
            columns,
            include_attributes=switches.table_column_attributes,
            popularity_order=switches.popularity_joins,
        ))
    return "\n\n".join(parts) if parts else _NONE


def rankings_block(ranked_tables) -> str:
    lines = [
        f"- {r.table} (score {r.relevance_score}): {r.explanation}"
        for r in ranked_tables
        if r.relevance_score is not None
    ]
    return "\n".join(lines) if lines else _NONE

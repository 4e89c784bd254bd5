"""Fully-qualified table/column/join extraction from parsed queries.

Identifier matching is case-insensitive (unquoted Trino semantics); all
extracted keys are lowercase ``db.table`` / ``db.table.column`` strings.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol

from . import ast
from .errors import AmbiguousColumnError, Span


class SchemaProvider(Protocol):
    """Minimal catalog surface the resolver needs."""

    def has_table(self, key: str) -> bool:
        """Whether ``db.table`` exists in the catalog."""

    def columns_of(self, key: str) -> frozenset[str] | None:
        """Lowercase column names of ``db.table``, or None when unknown."""


class EmptySchema:
    """Schema provider that knows nothing (pure syntactic extraction)."""

    def has_table(self, key: str) -> bool:
        return False

    def columns_of(self, key: str) -> frozenset[str] | None:
        return None


@dataclass(frozen=True)
class QueryRefs:
    tables: frozenset[str]
    columns: frozenset[str]
    join_conditions: tuple[tuple[str, str], ...]


@dataclass
class ResolvedRefs:
    """Extraction detail retained for validation diagnostics."""

    table_refs: list[tuple[str, Span]] = field(default_factory=list)
    column_refs: list[tuple[str, Span]] = field(default_factory=list)
    join_conditions: list[tuple[str, str]] = field(default_factory=list)
    function_refs: list[tuple[str, Span]] = field(default_factory=list)

    def to_query_refs(self) -> QueryRefs:
        seen: list[tuple[str, str]] = []
        for pair in self.join_conditions:
            if pair not in seen:
                seen.append(pair)
        return QueryRefs(
            frozenset(k for k, _ in self.table_refs),
            frozenset(k for k, _ in self.column_refs),
            tuple(seen),
        )


def extract_refs(
    query: ast.Query,
    schema: SchemaProvider,
    default_database: str,
    strict: bool = True,
) -> QueryRefs:
    """Resolve a parsed query against catalog schemas.

    Aliases are resolved, CTE names are excluded from tables, 1-part table
    names are qualified with ``default_database``, and equality predicates
    between columns of two distinct relations become join conditions.

    Raises:
        AmbiguousColumnError: in strict mode, when an unqualified column is
            owned by two or more in-scope tables with known schemas.
    """
    return resolve(query, schema, default_database, strict).to_query_refs()


def resolve(
    query: ast.Query,
    schema: SchemaProvider,
    default_database: str,
    strict: bool = True,
) -> ResolvedRefs:
    resolver = _Resolver(schema, default_database.lower(), strict)
    resolver.resolve_query(query, _Env())
    return resolver.out


@dataclass
class _Relation:
    match_names: tuple[str, ...]  # lowered names this relation answers to
    kind: str  # table | cte | derived
    key: str | None  # db.table when kind == table
    columns: frozenset[str] | None  # lowered output/column names when known


@dataclass
class _Env:
    """Lexical environment: visible CTEs plus enclosing relation scopes."""

    ctes: dict[str, frozenset[str] | None] = field(default_factory=dict)
    parent_relations: tuple[_Relation, ...] = ()

    def child(self, new_ctes: dict[str, frozenset[str] | None]) -> "_Env":
        merged = dict(self.ctes)
        merged.update(new_ctes)
        return _Env(merged, self.parent_relations)

    def with_parents(self, relations: tuple[_Relation, ...]) -> "_Env":
        return _Env(dict(self.ctes), relations + self.parent_relations)


class _Resolver:
    def __init__(self, schema: SchemaProvider, default_db: str, strict: bool):
        self.schema = schema
        self.default_db = default_db
        self.strict = strict
        self.out = ResolvedRefs()

    # --- query walking ---

    def resolve_query(self, query: ast.Query, env: _Env) -> frozenset[str] | None:
        """Resolve a query; returns its output column names (None if opaque)."""
        local_ctes: dict[str, frozenset[str] | None] = {}
        for cte in query.ctes:
            cte_env = env.child(local_ctes)
            local_ctes[cte.name.name.lower()] = self.resolve_query(cte.query, cte_env)
        body_env = env.child(local_ctes)
        output, relations = self.resolve_body(query.body, body_env)
        if query.order_by:
            aliases = output or frozenset()
            scope_env = body_env.with_parents(())
            for item in query.order_by:
                self.resolve_expr(item.expr, relations, scope_env, alias_names=aliases)
        return output

    def resolve_body(
        self, body: ast.Select | ast.SetOp, env: _Env
    ) -> tuple[frozenset[str] | None, list[_Relation]]:
        if isinstance(body, ast.SetOp):
            left_out, left_rel = self.resolve_body(body.left, env)
            self.resolve_body(body.right, env)
            return left_out, left_rel
        return self.resolve_select(body, env)

    def resolve_select(
        self, select: ast.Select, env: _Env
    ) -> tuple[frozenset[str] | None, list[_Relation]]:
        relations: list[_Relation] = []
        if select.from_ is not None:
            self.collect_relations(select.from_, env, relations)

        aliases = frozenset(
            item.alias.name.lower()
            for item in select.items
            if isinstance(item, ast.SelectItem) and item.alias
        )

        # ON conditions see the full FROM scope (simplified from left-to-right)
        if select.from_ is not None:
            self.resolve_join_conditions(select.from_, relations, env)

        for item in select.items:
            if isinstance(item, ast.Star):
                self.expand_star(item, relations)
            else:
                self.resolve_expr(item.expr, relations, env)
        if select.where is not None:
            self.resolve_expr(select.where, relations, env)
            self.collect_equi_joins(select.where, relations, env)
        for expr in select.group_by:
            self.resolve_expr(expr, relations, env, alias_names=aliases)
        if select.having is not None:
            self.resolve_expr(select.having, relations, env, alias_names=aliases)

        return self.output_columns(select, relations), relations

    def collect_relations(
        self, rel: ast.Relation, env: _Env, out: list[_Relation]
    ) -> None:
        if isinstance(rel, ast.Join):
            self.collect_relations(rel.left, env, out)
            self.collect_relations(rel.right, env, out)
            return
        if isinstance(rel, ast.DerivedTable):
            output = self.resolve_query(rel.query, env)
            out.append(_Relation((rel.alias.name.lower(),), "derived", None, output))
            return
        assert isinstance(rel, ast.TableRef)
        parts = [p.name.lower() for p in rel.name.parts]
        alias = rel.alias.name.lower() if rel.alias else None
        if len(parts) == 1 and parts[0] in env.ctes:
            names = (alias,) if alias else (parts[0],)
            out.append(_Relation(names, "cte", None, env.ctes[parts[0]]))
            return
        if len(parts) == 1:
            key = f"{self.default_db}.{parts[0]}"
        else:
            key = f"{parts[-2]}.{parts[-1]}"  # 3-part names drop the catalog part
        self.out.table_refs.append((key, rel.name.span))
        if alias:
            names: tuple[str, ...] = (alias,)
        else:
            names = (parts[-1], key)
        out.append(_Relation(names, "table", key, self.schema.columns_of(key)))

    def resolve_join_conditions(
        self, rel: ast.Relation, relations: list[_Relation], env: _Env
    ) -> None:
        if not isinstance(rel, ast.Join):
            return
        self.resolve_join_conditions(rel.left, relations, env)
        self.resolve_join_conditions(rel.right, relations, env)
        if rel.condition is not None:
            self.resolve_expr(rel.condition, relations, env)
            self.collect_equi_joins(rel.condition, relations, env)

    # --- expression resolution ---

    def resolve_expr(
        self,
        expr: ast.Expr,
        relations: list[_Relation],
        env: _Env,
        alias_names: frozenset[str] = frozenset(),
    ) -> None:
        for node in ast.walk_expr(expr):
            if isinstance(node, ast.ColumnRef):
                self.resolve_column(node, relations, env, alias_names)
            elif isinstance(node, ast.FuncCall):
                self.out.function_refs.append((node.name.name.lower(), node.name.span))
            elif isinstance(node, (ast.InSubquery, ast.ScalarSubquery)):
                sub_env = env.with_parents(tuple(relations))
                self.resolve_query(node.query, sub_env)

    def resolve_column(
        self,
        ref: ast.ColumnRef,
        relations: list[_Relation],
        env: _Env,
        alias_names: frozenset[str],
    ) -> str | None:
        parts = [p.name.lower() for p in ref.name.parts]
        span = ref.name.span
        scope = list(relations) + list(env.parent_relations)
        if len(parts) == 3:
            key = f"{parts[0]}.{parts[1]}"
            for rel in scope:
                if rel.kind == "table" and rel.key == key:
                    return self.record_column(rel, parts[2], span)
            return None  # qualifier not in scope; nothing to attribute
        if len(parts) == 2:
            qualifier, column = parts
            for rel in scope:
                if qualifier in rel.match_names:
                    return self.record_column(rel, column, span)
            return None
        column = parts[0]
        owners = [
            rel for rel in relations
            if rel.columns is not None and column in rel.columns
        ]
        if len(owners) == 1:
            return self.record_column(owners[0], column, span)
        if len(owners) > 1:
            table_owners = [r.key for r in owners if r.kind == "table" and r.key]
            if len(table_owners) >= 2 and self.strict:
                raise AmbiguousColumnError(column, table_owners, span)
            return None
        if column in alias_names:
            return None  # select-item alias reference
        # No schema owns it: fall back to the only relation, or the only
        # relation whose schema is unknown.
        if len(relations) == 1:
            return self.record_column(relations[0], column, span)
        unknown = [rel for rel in relations if rel.columns is None]
        if len(unknown) == 1:
            return self.record_column(unknown[0], column, span)
        if relations and self.strict:
            candidates = [r.key for r in relations if r.kind == "table" and r.key]
            if len(candidates) >= 2:
                raise AmbiguousColumnError(column, candidates, span)
        if not relations:
            # column without FROM: try parent scope (correlated reference)
            for rel in env.parent_relations:
                if rel.columns is not None and column in rel.columns:
                    return self.record_column(rel, column, span)
        return None

    def record_column(self, rel: _Relation, column: str, span: Span) -> str | None:
        if rel.kind != "table" or rel.key is None:
            return None  # CTE / derived output, not a catalog column
        key = f"{rel.key}.{column}"
        self.out.column_refs.append((key, span))
        return key

    def expand_star(self, star: ast.Star, relations: list[_Relation]) -> None:
        if star.qualifier is not None:
            qualifier = star.qualifier.parts[-1].name.lower()
            targets = [rel for rel in relations if qualifier in rel.match_names]
        else:
            targets = relations
        for rel in targets:
            if rel.kind == "table" and rel.key and rel.columns is not None:
                for column in sorted(rel.columns):
                    self.out.column_refs.append((f"{rel.key}.{column}", star.span))

    def collect_equi_joins(
        self, expr: ast.Expr, relations: list[_Relation], env: _Env
    ) -> None:
        for node in ast.walk_expr(expr):
            if not (isinstance(node, ast.Binary) and node.op == "="):
                continue
            if not (
                isinstance(node.left, ast.ColumnRef)
                and isinstance(node.right, ast.ColumnRef)
            ):
                continue
            left = self.attribute_only(node.left, relations, env)
            right = self.attribute_only(node.right, relations, env)
            if left and right and left.rsplit(".", 1)[0] != right.rsplit(".", 1)[0]:
                pair = (left, right)
                if pair not in self.out.join_conditions:
                    self.out.join_conditions.append(pair)

    def attribute_only(
        self, ref: ast.ColumnRef, relations: list[_Relation], env: _Env
    ) -> str | None:
        """Resolve a column to its key without re-recording it."""
        before = len(self.out.column_refs)
        try:
            key = self.resolve_column(ref, relations, env, frozenset())
        except AmbiguousColumnError:
            return None
        del self.out.column_refs[before:]
        return key

    # --- output column computation ---

    def output_columns(
        self, select: ast.Select, relations: list[_Relation]
    ) -> frozenset[str] | None:
        names: list[str] = []
        for item in select.items:
            if isinstance(item, ast.Star):
                expanded = self.star_output(item, relations)
                if expanded is None:
                    return None
                names.extend(expanded)
                continue
            if item.alias:
                names.append(item.alias.name.lower())
            elif isinstance(item.expr, ast.ColumnRef):
                names.append(item.expr.name.parts[-1].name.lower())
            # unnamed computed expressions contribute no resolvable name
        return frozenset(names)

    def star_output(
        self, star: ast.Star, relations: list[_Relation]
    ) -> list[str] | None:
        if star.qualifier is not None:
            qualifier = star.qualifier.parts[-1].name.lower()
            targets = [rel for rel in relations if qualifier in rel.match_names]
        else:
            targets = relations
        names: list[str] = []
        for rel in targets:
            if rel.columns is None:
                return None
            names.extend(sorted(rel.columns))
        return names

"""AST node types for the SQL subset, plus the canonical renderer.

The canonical rendering is deterministic (uppercase keywords, single spaces,
minimal parentheses) and is a parser fixpoint: ``render(parse(render(x)))``
equals ``render(x)`` for every query in the subset.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import Span
from .lexer import KEYWORDS, UNSUPPORTED_KEYWORDS

_BARE_SAFE = re.compile(r"^[A-Za-z_][A-Za-z0-9_$]*$")


@dataclass(frozen=True)
class Identifier:
    name: str
    span: Span
    quoted: bool = False

    def render(self) -> str:
        if self.quoted or not _BARE_SAFE.match(self.name) or self.name.upper() in KEYWORDS \
                or self.name.upper() in UNSUPPORTED_KEYWORDS:
            return f'"{self.name}"'
        return self.name


@dataclass(frozen=True)
class Name:
    """Dotted name of 1-3 identifier parts (table or column reference)."""

    parts: tuple[Identifier, ...]
    span: Span

    def render(self) -> str:
        return ".".join(p.render() for p in self.parts)

    @property
    def dotted(self) -> str:
        return ".".join(p.name for p in self.parts)


# --- expressions -----------------------------------------------------------

class Expr:
    """Marker base class for expression nodes."""


@dataclass(frozen=True)
class ColumnRef(Expr):
    name: Name

    def render(self) -> str:
        return self.name.render()


@dataclass(frozen=True)
class Star(Expr):
    qualifier: Name | None
    span: Span

    def render(self) -> str:
        return f"{self.qualifier.render()}.*" if self.qualifier else "*"


@dataclass(frozen=True)
class Literal(Expr):
    kind: str  # number | string | boolean | null
    value: str
    span: Span

    def render(self) -> str:
        if self.kind == "string":
            return "'" + self.value.replace("'", "''") + "'"
        return self.value


@dataclass(frozen=True)
class TypedLiteral(Expr):
    """INTERVAL / DATE / TIMESTAMP string literals, e.g. DATE '2024-01-01'."""

    prefix: str
    value: str
    unit: str | None
    span: Span

    def render(self) -> str:
        text = f"{self.prefix} '" + self.value.replace("'", "''") + "'"
        return f"{text} {self.unit}" if self.unit else text


@dataclass(frozen=True)
class FuncCall(Expr):
    name: Identifier
    args: tuple[Expr, ...]
    distinct: bool = False
    star: bool = False

    def render(self) -> str:
        if self.star:
            return f"{self.name.render()}(*)"
        inner = ", ".join(a.render() for a in self.args)
        if self.distinct:
            inner = f"DISTINCT {inner}"
        return f"{self.name.render()}({inner})"


@dataclass(frozen=True)
class Cast(Expr):
    operand: Expr
    type_name: str

    def render(self) -> str:
        return f"CAST({self.operand.render()} AS {self.type_name})"


@dataclass(frozen=True)
class Case(Expr):
    operand: Expr | None
    whens: tuple[tuple[Expr, Expr], ...]
    else_: Expr | None

    def render(self) -> str:
        parts = ["CASE"]
        if self.operand is not None:
            parts.append(self.operand.render())
        for cond, result in self.whens:
            parts.append(f"WHEN {cond.render()} THEN {result.render()}")
        if self.else_ is not None:
            parts.append(f"ELSE {self.else_.render()}")
        parts.append("END")
        return " ".join(parts)


@dataclass(frozen=True)
class Unary(Expr):
    op: str  # -, +, NOT
    operand: Expr

    def render(self) -> str:
        sep = " " if self.op == "NOT" else ""
        return f"{self.op}{sep}{_parenthesize(self.operand)}"


@dataclass(frozen=True)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr

    def render(self) -> str:
        return f"{_parenthesize(self.left)} {self.op} {_parenthesize(self.right)}"


@dataclass(frozen=True)
class IsNull(Expr):
    operand: Expr
    negated: bool

    def render(self) -> str:
        tail = "IS NOT NULL" if self.negated else "IS NULL"
        return f"{_parenthesize(self.operand)} {tail}"


@dataclass(frozen=True)
class Like(Expr):
    operand: Expr
    pattern: Expr
    negated: bool

    def render(self) -> str:
        kw = "NOT LIKE" if self.negated else "LIKE"
        return f"{_parenthesize(self.operand)} {kw} {_parenthesize(self.pattern)}"


@dataclass(frozen=True)
class Between(Expr):
    operand: Expr
    low: Expr
    high: Expr
    negated: bool

    def render(self) -> str:
        kw = "NOT BETWEEN" if self.negated else "BETWEEN"
        return (
            f"{_parenthesize(self.operand)} {kw} "
            f"{_parenthesize(self.low)} AND {_parenthesize(self.high)}"
        )


@dataclass(frozen=True)
class InList(Expr):
    operand: Expr
    items: tuple[Expr, ...]
    negated: bool

    def render(self) -> str:
        kw = "NOT IN" if self.negated else "IN"
        inner = ", ".join(i.render() for i in self.items)
        return f"{_parenthesize(self.operand)} {kw} ({inner})"


@dataclass(frozen=True)
class InSubquery(Expr):
    operand: Expr
    query: "Query"
    negated: bool

    def render(self) -> str:
        kw = "NOT IN" if self.negated else "IN"
        return f"{_parenthesize(self.operand)} {kw} ({self.query.render()})"


@dataclass(frozen=True)
class ScalarSubquery(Expr):
    query: "Query"

    def render(self) -> str:
        return f"({self.query.render()})"


@dataclass(frozen=True)
class Grouping(Expr):
    """Explicit parentheses kept so rendering stays a parse fixpoint."""

    operand: Expr

    def render(self) -> str:
        return f"({self.operand.render()})"


def _parenthesize(expr: Expr) -> str:
    # Compound operands are wrapped so the canonical text re-parses with the
    # same shape regardless of precedence.
    if isinstance(expr, (Binary, Unary, IsNull, Like, Between, InList, InSubquery, Case)):
        return f"({expr.render()})"
    return expr.render()


# --- relations and selects -------------------------------------------------

@dataclass(frozen=True)
class SelectItem:
    expr: Expr
    alias: Identifier | None

    def render(self) -> str:
        if self.alias:
            return f"{self.expr.render()} AS {self.alias.render()}"
        return self.expr.render()


class Relation:
    """Marker base class for FROM items."""


@dataclass(frozen=True)
class TableRef(Relation):
    name: Name
    alias: Identifier | None

    def render(self) -> str:
        text = self.name.render()
        return f"{text} AS {self.alias.render()}" if self.alias else text


@dataclass(frozen=True)
class DerivedTable(Relation):
    query: "Query"
    alias: Identifier

    def render(self) -> str:
        return f"({self.query.render()}) AS {self.alias.render()}"


@dataclass(frozen=True)
class Join(Relation):
    kind: str  # INNER | LEFT | RIGHT | FULL | CROSS
    left: Relation
    right: Relation
    condition: Expr | None  # None only for CROSS

    def render(self) -> str:
        if self.kind == "CROSS":
            return f"{self.left.render()} CROSS JOIN {self.right.render()}"
        return (
            f"{self.left.render()} {self.kind} JOIN {self.right.render()}"
            f" ON {self.condition.render()}"
        )


@dataclass(frozen=True)
class Select:
    items: tuple[SelectItem | Star, ...]
    from_: Relation | None
    where: Expr | None
    group_by: tuple[Expr, ...]
    having: Expr | None
    distinct: bool = False

    def render(self) -> str:
        parts = ["SELECT"]
        if self.distinct:
            parts.append("DISTINCT")
        parts.append(", ".join(i.render() for i in self.items))
        if self.from_ is not None:
            parts.append(f"FROM {self.from_.render()}")
        if self.where is not None:
            parts.append(f"WHERE {self.where.render()}")
        if self.group_by:
            parts.append("GROUP BY " + ", ".join(e.render() for e in self.group_by))
        if self.having is not None:
            parts.append(f"HAVING {self.having.render()}")
        return " ".join(parts)


@dataclass(frozen=True)
class SetOp:
    op: str  # UNION | UNION ALL
    left: "Select | SetOp"
    right: "Select | SetOp"

    def render(self) -> str:
        return f"{self.left.render()} {self.op} {self.right.render()}"


@dataclass(frozen=True)
class SortItem:
    expr: Expr
    descending: bool | None  # None = unspecified

    def render(self) -> str:
        text = self.expr.render()
        if self.descending is True:
            return f"{text} DESC"
        if self.descending is False:
            return f"{text} ASC"
        return text


@dataclass(frozen=True)
class Cte:
    name: Identifier
    query: "Query"

    def render(self) -> str:
        return f"{self.name.render()} AS ({self.query.render()})"


@dataclass(frozen=True)
class Query:
    """A full query: optional CTEs, a select/set-op body, ORDER BY, LIMIT."""

    body: Select | SetOp
    ctes: tuple[Cte, ...] = ()
    order_by: tuple[SortItem, ...] = ()
    limit: int | None = None

    def render(self) -> str:
        parts = []
        if self.ctes:
            parts.append("WITH " + ", ".join(c.render() for c in self.ctes))
        parts.append(self.body.render())
        if self.order_by:
            parts.append("ORDER BY " + ", ".join(s.render() for s in self.order_by))
        if self.limit is not None:
            parts.append(f"LIMIT {self.limit}")
        return " ".join(parts)


def render(query: Query) -> str:
    """Canonical single-line rendering of a parsed query."""
    return query.render()


def walk_expr(expr: Expr):
    """Depth-first iteration over an expression tree (including ``expr``)."""
    yield expr
    children: tuple = ()
    if isinstance(expr, FuncCall):
        children = expr.args
    elif isinstance(expr, Cast):
        children = (expr.operand,)
    elif isinstance(expr, Case):
        children = tuple(x for pair in expr.whens for x in pair)
        if expr.operand is not None:
            children = (expr.operand,) + children
        if expr.else_ is not None:
            children = children + (expr.else_,)
    elif isinstance(expr, Unary):
        children = (expr.operand,)
    elif isinstance(expr, Binary):
        children = (expr.left, expr.right)
    elif isinstance(expr, IsNull):
        children = (expr.operand,)
    elif isinstance(expr, Like):
        children = (expr.operand, expr.pattern)
    elif isinstance(expr, Between):
        children = (expr.operand, expr.low, expr.high)
    elif isinstance(expr, InList):
        children = (expr.operand,) + expr.items
    elif isinstance(expr, (InSubquery, ScalarSubquery)):
        children = (expr.operand,) if isinstance(expr, InSubquery) else ()
    elif isinstance(expr, Grouping):
        children = (expr.operand,)
    for child in children:
        yield from walk_expr(child)

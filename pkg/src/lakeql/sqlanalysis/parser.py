"""Recursive-descent parser for the SQL subset.

Grammar reference lives in ``docs/sql-subset.md``. Constructs outside the
subset raise :class:`SqlSyntaxError` naming the construct rather than
silently mis-parsing.
"""

from __future__ import annotations

from . import ast
from .errors import SqlSyntaxError, Span
from .lexer import Token, TokenKind, tokenize

_COMPARISON_OPS = {"=", "<>", "!=", "<", "<=", ">", ">="}
_TYPE_WORDS = {
    "VARCHAR", "CHAR", "BIGINT", "INTEGER", "INT", "SMALLINT", "TINYINT",
    "DOUBLE", "REAL", "DECIMAL", "BOOLEAN", "DATE", "TIMESTAMP", "VARBINARY",
    "JSON", "ARRAY", "MAP", "TIME", "UUID",
}


def parse(sql: str) -> ast.Query:
    """Parse ``sql`` into a :class:`~lakeql.sqlanalysis.ast.Query`.

    Raises:
        SqlSyntaxError: first lexical or grammatical error, with span.
    """
    if not sql or not sql.strip():
        raise SqlSyntaxError("empty statement", Span(0, len(sql)))
    tokens = tokenize(sql)
    parser = _Parser(tokens, sql)
    query = parser.parse_query()
    parser.expect_eof()
    return query


class _Parser:
    def __init__(self, tokens: list[Token], source: str):
        self.tokens = tokens
        self.source = source
        self.pos = 0

    # --- token plumbing ---

    @property
    def cur(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def at_keyword(self, *words: str) -> bool:
        return self.cur.kind is TokenKind.KEYWORD and self.cur.value in words

    def accept_keyword(self, *words: str) -> Token | None:
        if self.at_keyword(*words):
            return self.advance()
        return None

    def expect_keyword(self, word: str) -> Token:
        tok = self.accept_keyword(word)
        if tok is None:
            self.fail(f"expected {word}")
        return tok

    def at_punct(self, value: str) -> bool:
        return self.cur.kind is TokenKind.PUNCT and self.cur.value == value

    def accept_punct(self, value: str) -> Token | None:
        if self.at_punct(value):
            return self.advance()
        return None

    def expect_punct(self, value: str) -> Token:
        tok = self.accept_punct(value)
        if tok is None:
            self.fail(f"expected {value!r}")
        return tok

    def at_op(self, *values: str) -> bool:
        return self.cur.kind is TokenKind.OP and self.cur.value in values

    def fail(self, message: str):
        tok = self.cur
        if tok.kind is TokenKind.EOF:
            raise SqlSyntaxError(f"{message}, found end of input", tok.span)
        raise SqlSyntaxError(f"{message}, found {tok.value!r}", tok.span)

    def expect_eof(self) -> None:
        if self.cur.kind is not TokenKind.EOF:
            self.fail("expected end of statement")

    # --- identifiers and names ---

    def parse_identifier(self, what: str = "identifier") -> ast.Identifier:
        tok = self.cur
        if tok.kind is TokenKind.IDENT:
            self.advance()
            return ast.Identifier(tok.value, tok.span)
        if tok.kind is TokenKind.QIDENT:
            self.advance()
            return ast.Identifier(tok.value, tok.span, quoted=True)
        self.fail(f"expected {what}")

    def parse_name(self, max_parts: int = 3) -> ast.Name:
        first = self.parse_identifier()
        parts = [first]
        while len(parts) < max_parts and self.at_punct("."):
            # Do not consume the dot if it introduces ".*" (handled by caller)
            nxt = self.tokens[self.pos + 1]
            if nxt.kind is TokenKind.OP and nxt.value == "*":
                break
            self.advance()
            parts.append(self.parse_identifier())
        span = Span(parts[0].span.start, parts[-1].span.end)
        return ast.Name(tuple(parts), span)

    # --- query structure ---

    def parse_query(self) -> ast.Query:
        ctes: list[ast.Cte] = []
        if self.accept_keyword("WITH"):
            while True:
                name = self.parse_identifier("CTE name")
                self.expect_keyword("AS")
                self.expect_punct("(")
                inner = self.parse_query()
                self.expect_punct(")")
                ctes.append(ast.Cte(name, inner))
                if not self.accept_punct(","):
                    break
        body = self.parse_set_expr()
        order_by: list[ast.SortItem] = []
        if self.accept_keyword("ORDER"):
            self.expect_keyword("BY")
            while True:
                expr = self.parse_expr()
                descending: bool | None = None
                if self.accept_keyword("DESC"):
                    descending = True
                elif self.accept_keyword("ASC"):
                    descending = False
                order_by.append(ast.SortItem(expr, descending))
                if not self.accept_punct(","):
                    break
        limit: int | None = None
        if self.accept_keyword("LIMIT"):
            tok = self.cur
            if tok.kind is not TokenKind.NUMBER or "." in tok.value:
                self.fail("expected integer LIMIT")
            self.advance()
            limit = int(tok.value)
        return ast.Query(body, tuple(ctes), tuple(order_by), limit)

    def parse_set_expr(self) -> ast.Select | ast.SetOp:
        left = self.parse_select_core()
        while self.at_keyword("UNION"):
            self.advance()
            op = "UNION ALL" if self.accept_keyword("ALL") else "UNION"
            right = self.parse_select_core()
            left = ast.SetOp(op, left, right)
        return left

    def parse_select_core(self) -> ast.Select | ast.SetOp:
        if self.accept_punct("("):
            inner = self.parse_set_expr()
            self.expect_punct(")")
            return inner
        self.expect_keyword("SELECT")
        distinct = bool(self.accept_keyword("DISTINCT"))
        items: list[ast.SelectItem | ast.Star] = []
        while True:
            items.append(self.parse_select_item())
            if not self.accept_punct(","):
                break
        from_ = None
        if self.accept_keyword("FROM"):
            from_ = self.parse_from()
        where = self.parse_expr() if self.accept_keyword("WHERE") else None
        group_by: list[ast.Expr] = []
        if self.accept_keyword("GROUP"):
            self.expect_keyword("BY")
            while True:
                group_by.append(self.parse_expr())
                if not self.accept_punct(","):
                    break
        having = self.parse_expr() if self.accept_keyword("HAVING") else None
        return ast.Select(tuple(items), from_, where, tuple(group_by), having, distinct)

    def parse_select_item(self) -> ast.SelectItem | ast.Star:
        if self.at_op("*"):
            tok = self.advance()
            return ast.Star(None, tok.span)
        # qualified star: name.*
        mark = self.pos
        if self.cur.kind in (TokenKind.IDENT, TokenKind.QIDENT):
            name = self.parse_name(max_parts=2)
            if self.at_punct("."):
                nxt = self.tokens[self.pos + 1]
                if nxt.kind is TokenKind.OP and nxt.value == "*":
                    self.advance()  # .
                    star = self.advance()  # *
                    return ast.Star(name, Span(name.span.start, star.span.end))
            self.pos = mark  # not a star item; reparse as expression
        expr = self.parse_expr()
        alias = None
        if self.accept_keyword("AS"):
            alias = self.parse_identifier("alias")
        elif self.cur.kind in (TokenKind.IDENT, TokenKind.QIDENT):
            alias = self.parse_identifier("alias")
        return ast.SelectItem(expr, alias)

    # --- FROM clause ---

    def parse_from(self) -> ast.Relation:
        rel = self.parse_relation()
        while True:
            if self.accept_keyword("CROSS"):
                self.expect_keyword("JOIN")
                right = self.parse_relation()
                rel = ast.Join("CROSS", rel, right, None)
                continue
            kind = None
            if self.at_keyword("JOIN", "INNER"):
                if self.accept_keyword("INNER"):
                    pass
                kind = "INNER"
            elif self.at_keyword("LEFT", "RIGHT", "FULL"):
                kind = self.advance().value
                self.accept_keyword("OUTER")
            else:
                break
            self.expect_keyword("JOIN")
            right = self.parse_relation()
            self.expect_keyword("ON")
            condition = self.parse_expr()
            rel = ast.Join(kind, rel, right, condition)
        return rel

    def parse_relation(self) -> ast.Relation:
        if self.accept_punct("("):
            query = self.parse_query()
            self.expect_punct(")")
            self.accept_keyword("AS")
            alias = self.parse_identifier("derived table alias")
            return ast.DerivedTable(query, alias)
        name = self.parse_name(max_parts=3)
        alias = None
        if self.accept_keyword("AS"):
            alias = self.parse_identifier("alias")
        elif self.cur.kind in (TokenKind.IDENT, TokenKind.QIDENT):
            alias = self.parse_identifier("alias")
        return ast.TableRef(name, alias)

    # --- expressions (precedence climbing) ---

    def parse_expr(self) -> ast.Expr:
        return self.parse_or()

    def parse_or(self) -> ast.Expr:
        left = self.parse_and()
        while self.accept_keyword("OR"):
            left = ast.Binary("OR", left, self.parse_and())
        return left

    def parse_and(self) -> ast.Expr:
        left = self.parse_not()
        while self.accept_keyword("AND"):
            left = ast.Binary("AND", left, self.parse_not())
        return left

    def parse_not(self) -> ast.Expr:
        if self.accept_keyword("NOT"):
            return ast.Unary("NOT", self.parse_not())
        return self.parse_predicate()

    def parse_predicate(self) -> ast.Expr:
        left = self.parse_additive()
        if self.at_op(*_COMPARISON_OPS):
            op = self.advance().value
            if op == "!=":
                op = "<>"
            return ast.Binary(op, left, self.parse_additive())
        if self.accept_keyword("IS"):
            negated = bool(self.accept_keyword("NOT"))
            self.expect_keyword("NULL")
            return ast.IsNull(left, negated)
        negated = bool(self.accept_keyword("NOT"))
        if self.accept_keyword("IN"):
            self.expect_punct("(")
            if self.at_keyword("SELECT", "WITH"):
                query = self.parse_query()
                self.expect_punct(")")
                return ast.InSubquery(left, query, negated)
            items = [self.parse_expr()]
            while self.accept_punct(","):
                items.append(self.parse_expr())
            self.expect_punct(")")
            return ast.InList(left, tuple(items), negated)
        if self.accept_keyword("LIKE"):
            return ast.Like(left, self.parse_additive(), negated)
        if self.accept_keyword("BETWEEN"):
            low = self.parse_additive()
            self.expect_keyword("AND")
            high = self.parse_additive()
            return ast.Between(left, low, high, negated)
        if negated:
            self.fail("expected IN, LIKE or BETWEEN after NOT")
        return left

    def parse_additive(self) -> ast.Expr:
        left = self.parse_multiplicative()
        while self.at_op("+", "-", "||"):
            op = self.advance().value
            left = ast.Binary(op, left, self.parse_multiplicative())
        return left

    def parse_multiplicative(self) -> ast.Expr:
        left = self.parse_unary()
        while self.at_op("*", "/", "%"):
            op = self.advance().value
            left = ast.Binary(op, left, self.parse_unary())
        return left

    def parse_unary(self) -> ast.Expr:
        if self.at_op("-", "+"):
            op = self.advance().value
            return ast.Unary(op, self.parse_unary())
        return self.parse_primary()

    def parse_primary(self) -> ast.Expr:
        tok = self.cur
        if tok.kind is TokenKind.NUMBER:
            self.advance()
            return ast.Literal("number", tok.value, tok.span)
        if tok.kind is TokenKind.STRING:
            self.advance()
            return ast.Literal("string", tok.value, tok.span)
        if self.at_keyword("TRUE", "FALSE"):
            self.advance()
            return ast.Literal("boolean", tok.value, tok.span)
        if self.at_keyword("NULL"):
            self.advance()
            return ast.Literal("null", "NULL", tok.span)
        if self.at_keyword("INTERVAL", "DATE", "TIMESTAMP"):
            return self.parse_typed_literal()
        if self.at_keyword("CASE"):
            return self.parse_case()
        if self.at_keyword("CAST"):
            return self.parse_cast()
        if self.accept_punct("("):
            if self.at_keyword("SELECT", "WITH"):
                query = self.parse_query()
                self.expect_punct(")")
                return ast.ScalarSubquery(query)
            inner = self.parse_expr()
            self.expect_punct(")")
            return ast.Grouping(inner)
        if tok.kind in (TokenKind.IDENT, TokenKind.QIDENT):
            # function call?
            nxt = self.tokens[self.pos + 1]
            if tok.kind is TokenKind.IDENT and nxt.kind is TokenKind.PUNCT and nxt.value == "(":
                return self.parse_func_call()
            name = self.parse_name(max_parts=3)
            return ast.ColumnRef(name)
        self.fail("expected expression")

    def parse_typed_literal(self) -> ast.Expr:
        prefix_tok = self.advance()
        if self.cur.kind is not TokenKind.STRING:
            # DATE/TIMESTAMP are also plain type words in CAST; as a primary
            # they require a string literal. Reparse as a column reference for
            # identifiers named e.g. "date" is not supported; keyword wins.
            self.fail(f"expected string literal after {prefix_tok.value}")
        value_tok = self.advance()
        unit = None
        if prefix_tok.value == "INTERVAL" and self.cur.kind is TokenKind.IDENT:
            unit = self.advance().value.upper()
        return ast.TypedLiteral(
            prefix_tok.value, value_tok.value, unit,
            Span(prefix_tok.span.start, value_tok.span.end),
        )

    def parse_case(self) -> ast.Expr:
        self.expect_keyword("CASE")
        operand = None
        if not self.at_keyword("WHEN"):
            operand = self.parse_expr()
        whens: list[tuple[ast.Expr, ast.Expr]] = []
        while self.accept_keyword("WHEN"):
            cond = self.parse_expr()
            self.expect_keyword("THEN")
            whens.append((cond, self.parse_expr()))
        if not whens:
            self.fail("expected WHEN clause in CASE")
        else_ = self.parse_expr() if self.accept_keyword("ELSE") else None
        self.expect_keyword("END")
        return ast.Case(operand, tuple(whens), else_)

    def parse_cast(self) -> ast.Expr:
        self.expect_keyword("CAST")
        self.expect_punct("(")
        operand = self.parse_expr()
        self.expect_keyword("AS")
        type_name = self.parse_type_name()
        self.expect_punct(")")
        return ast.Cast(operand, type_name)

    def parse_type_name(self) -> str:
        tok = self.cur
        if tok.kind is TokenKind.KEYWORD and tok.value in ("DATE", "TIMESTAMP"):
            self.advance()
            base = tok.value
        elif tok.kind is TokenKind.IDENT and tok.value.upper() in _TYPE_WORDS:
            self.advance()
            base = tok.value.upper()
        else:
            self.fail("expected type name")
        if self.accept_punct("("):
            args = []
            while True:
                num = self.cur
                if num.kind is not TokenKind.NUMBER:
                    self.fail("expected numeric type parameter")
                self.advance()
                args.append(num.value)
                if not self.accept_punct(","):
                    break
            self.expect_punct(")")
            base = f"{base}({', '.join(args)})"
        return base

    def parse_func_call(self) -> ast.Expr:
        name_tok = self.advance()
        name = ast.Identifier(name_tok.value, name_tok.span)
        self.expect_punct("(")
        if self.at_op("*"):
            self.advance()
            self.expect_punct(")")
            return ast.FuncCall(name, (), star=True)
        if self.accept_punct(")"):
            return ast.FuncCall(name, ())
        distinct = bool(self.accept_keyword("DISTINCT"))
        args = [self.parse_expr()]
        while self.accept_punct(","):
            args.append(self.parse_expr())
        self.expect_punct(")")
        return ast.FuncCall(name, tuple(args), distinct=distinct)

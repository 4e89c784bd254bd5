"""Tokenizer for the supported Trino-like SQL subset.

Produces a flat token stream with source spans; comments are skipped but
their bytes still count toward spans so diagnostics point at real offsets.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

from .errors import SqlSyntaxError, Span


class TokenKind(Enum):
    KEYWORD = "keyword"
    IDENT = "ident"
    QIDENT = "quoted_ident"
    NUMBER = "number"
    STRING = "string"
    OP = "op"
    PUNCT = "punct"
    EOF = "eof"


# Reserved words recognized by the grammar. Anything else is an identifier.
KEYWORDS = frozenset({
    "SELECT", "FROM", "WHERE", "GROUP", "BY", "HAVING", "ORDER", "LIMIT",
    "WITH", "AS", "JOIN", "INNER", "LEFT", "RIGHT", "FULL", "OUTER", "CROSS",
    "ON", "UNION", "ALL", "DISTINCT", "CASE", "WHEN", "THEN", "ELSE", "END",
    "CAST", "AND", "OR", "NOT", "IN", "IS", "NULL", "LIKE", "BETWEEN",
    "TRUE", "FALSE", "ASC", "DESC", "INTERVAL", "DATE", "TIMESTAMP",
})

# Recognized constructs that are deliberately outside the subset; naming them
# yields a better error than a generic "unexpected token".
UNSUPPORTED_KEYWORDS = frozenset({
    "INSERT", "UPDATE", "DELETE", "CREATE", "DROP", "ALTER", "MERGE",
    "OVER", "WINDOW", "LATERAL", "UNNEST", "EXCEPT", "INTERSECT",
    "GRANT", "REVOKE", "EXPLAIN", "VALUES", "TABLESAMPLE", "NATURAL",
    "USING", "GROUPING", "ROLLUP", "CUBE", "FETCH", "OFFSET", "EXISTS",
})

_OPERATORS = ("<>", "!=", "<=", ">=", "||", "=", "<", ">", "+", "-", "*", "/", "%")
_PUNCT = ("(", ")", ",", ".")

_NUMBER_RE = re.compile(r"\d+(\.\d+)?([eE][+-]?\d+)?")
_WORD_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_$]*")


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    value: str
    span: Span

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"Token({self.kind.value}, {self.value!r}, {self.span.start}:{self.span.end})"


def tokenize(sql: str) -> list[Token]:
    """Tokenize ``sql``, raising :class:`SqlSyntaxError` on lexical errors."""
    tokens: list[Token] = []
    i, n = 0, len(sql)
    while i < n:
        ch = sql[i]
        if ch in " \t\r\n":
            i += 1
            continue
        if sql.startswith("--", i):
            nl = sql.find("\n", i)
            i = n if nl < 0 else nl + 1
            continue
        if sql.startswith("/*", i):
            close = sql.find("*/", i + 2)
            if close < 0:
                raise SqlSyntaxError("unterminated block comment", Span(i, n))
            i = close + 2
            continue
        if ch == "'":
            j = i + 1
            buf: list[str] = []
            while True:
                if j >= n:
                    raise SqlSyntaxError("unterminated string literal", Span(i, n))
                if sql[j] == "'":
                    if j + 1 < n and sql[j + 1] == "'":  # escaped quote
                        buf.append("'")
                        j += 2
                        continue
                    break
                buf.append(sql[j])
                j += 1
            tokens.append(Token(TokenKind.STRING, "".join(buf), Span(i, j + 1)))
            i = j + 1
            continue
        if ch == '"':
            close = sql.find('"', i + 1)
            if close < 0:
                raise SqlSyntaxError("unterminated quoted identifier", Span(i, n))
            tokens.append(Token(TokenKind.QIDENT, sql[i + 1:close], Span(i, close + 1)))
            i = close + 1
            continue
        m = _NUMBER_RE.match(sql, i)
        if m and ch.isdigit():
            tokens.append(Token(TokenKind.NUMBER, m.group(0), Span(i, m.end())))
            i = m.end()
            continue
        m = _WORD_RE.match(sql, i)
        if m:
            word = m.group(0)
            upper = word.upper()
            if upper in KEYWORDS:
                tokens.append(Token(TokenKind.KEYWORD, upper, Span(i, m.end())))
            elif upper in UNSUPPORTED_KEYWORDS:
                raise SqlSyntaxError(
                    f"unsupported construct: {upper}", Span(i, m.end())
                )
            else:
                tokens.append(Token(TokenKind.IDENT, word, Span(i, m.end())))
            i = m.end()
            continue
        for op in _OPERATORS:
            if sql.startswith(op, i):
                tokens.append(Token(TokenKind.OP, op, Span(i, i + len(op))))
                i += len(op)
                break
        else:
            if ch in _PUNCT:
                tokens.append(Token(TokenKind.PUNCT, ch, Span(i, i + 1)))
                i += 1
            elif ch == ";":
                # A single trailing statement terminator is tolerated.
                rest = sql[i + 1:].strip()
                if rest:
                    raise SqlSyntaxError("multiple statements are not supported", Span(i, i + 1))
                i += 1
            else:
                raise SqlSyntaxError(f"unexpected character {ch!r}", Span(i, i + 1))
    tokens.append(Token(TokenKind.EOF, "", Span(n, n)))
    return tokens


def line_col(sql: str, offset: int) -> tuple[int, int]:
    """Map a character offset to a 1-based (line, column)."""
    line = sql.count("\n", 0, offset) + 1
    bol = sql.rfind("\n", 0, offset) + 1
    return line, offset - bol + 1

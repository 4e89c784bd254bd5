"""Shared error and span types for SQL analysis."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Span:
    """Half-open character range [start, end) into the source text."""

    start: int
    end: int

    def slice(self, source: str) -> str:
        return source[self.start:self.end]


class SqlSyntaxError(Exception):
    """Lexical or grammatical error with a source span."""

    def __init__(self, message: str, span: Span):
        super().__init__(message)
        self.message = message
        self.span = span


class AmbiguousColumnError(Exception):
    """Unqualified column owned by two or more in-scope tables."""

    def __init__(self, column: str, candidates: list[str], span: Span):
        super().__init__(
            f"ambiguous column {column!r}: owned by {', '.join(sorted(candidates))}"
        )
        self.column = column
        self.candidates = sorted(candidates)
        self.span = span

"""Draft validation against the catalog: the local stand-in for a dry-run
EXPLAIN, plus the batch hallucination check used by the fix loop.

``first_error`` mode mimics an engine that reports one problem at a time;
``full`` mode inventories every unknown table, column, and function so they
can be fixed together.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass, field
from enum import Enum

from .errors import Span, SqlSyntaxError
from .parser import parse
from .refs import SchemaProvider, resolve


class ValidationMode(Enum):
    FIRST_ERROR = "first_error"
    FULL = "full"


@dataclass
class ValidationReport:
    syntax_errors: list[tuple[str, Span]] = field(default_factory=list)
    unknown_tables: list[tuple[str, Span]] = field(default_factory=list)
    unknown_columns: list[tuple[str, Span]] = field(default_factory=list)
    unknown_functions: list[tuple[str, Span]] = field(default_factory=list)

    @property
    def is_valid(self) -> bool:
        return not (
            self.syntax_errors
            or self.unknown_tables
            or self.unknown_columns
            or self.unknown_functions
        )

    def issue_count(self) -> int:
        return (
            len(self.syntax_errors)
            + len(self.unknown_tables)
            + len(self.unknown_columns)
            + len(self.unknown_functions)
        )

    def summary_lines(self) -> list[str]:
        lines = [f"syntax error: {msg}" for msg, _ in self.syntax_errors]
        lines += [f"unknown table: {key}" for key, _ in self.unknown_tables]
        lines += [f"unknown column: {key}" for key, _ in self.unknown_columns]
        lines += [f"unknown function: {name}" for name, _ in self.unknown_functions]
        return lines


def builtin_functions() -> frozenset[str]:
    """Function whitelist shipped with the package (common Trino builtins)."""
    text = (
        importlib.resources.files("lakeql.assets")
        .joinpath("trino_functions.txt")
        .read_text(encoding="utf-8")
    )
    return frozenset(
        line.strip().lower()
        for line in text.splitlines()
        if line.strip() and not line.startswith("#")
    )


_BUILTIN_FUNCTIONS: frozenset[str] | None = None


def _functions() -> frozenset[str]:
    global _BUILTIN_FUNCTIONS
    if _BUILTIN_FUNCTIONS is None:
        _BUILTIN_FUNCTIONS = builtin_functions()
    return _BUILTIN_FUNCTIONS


def validate(
    sql: str,
    schema: SchemaProvider,
    mode: ValidationMode = ValidationMode.FULL,
    default_database: str = "default",
    function_whitelist: frozenset[str] | None = None,
) -> ValidationReport:
    """Validate ``sql`` against the catalog schema.

    Errors are data: the report is always returned, never raised. In
    FIRST_ERROR mode the report carries exactly one issue (syntax before
    semantics, then earliest source position). Columns of tables the catalog
    does not know are not double-reported.
    """
    report = ValidationReport()
    try:
        query = parse(sql)
    except SqlSyntaxError as exc:
        report.syntax_errors.append((exc.message, exc.span))
        return report

    refs = resolve(query, schema, default_database, strict=False)
    whitelist = function_whitelist if function_whitelist is not None else _functions()

    seen_tables: set[str] = set()
    for key, span in refs.table_refs:
        if not schema.has_table(key) and key not in seen_tables:
            seen_tables.add(key)
            report.unknown_tables.append((key, span))

    seen_columns: set[str] = set()
    for key, span in refs.column_refs:
        table_key, column = key.rsplit(".", 1)
        if not schema.has_table(table_key):
            continue  # already reported as an unknown table
        columns = schema.columns_of(table_key)
        if columns is None:
            continue
        if column not in columns and key not in seen_columns:
            seen_columns.add(key)
            report.unknown_columns.append((key, span))

    seen_functions: set[str] = set()
    for name, span in refs.function_refs:
        if name not in whitelist and name not in seen_functions:
            seen_functions.add(name)
            report.unknown_functions.append((name, span))

    if mode is ValidationMode.FIRST_ERROR and not report.is_valid:
        first = min(
            [("table", item) for item in report.unknown_tables]
            + [("column", item) for item in report.unknown_columns]
            + [("function", item) for item in report.unknown_functions],
            key=lambda pair: pair[1][1].start,
        )
        report.unknown_tables = [first[1]] if first[0] == "table" else []
        report.unknown_columns = [first[1]] if first[0] == "column" else []
        report.unknown_functions = [first[1]] if first[0] == "function" else []
    return report

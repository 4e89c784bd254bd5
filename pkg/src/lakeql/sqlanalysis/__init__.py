"""SQL subset parsing, reference extraction, validation, and log mining."""

from .ast import Query, render
from .errors import AmbiguousColumnError, SqlSyntaxError, Span
from .parser import parse
from .refs import EmptySchema, QueryRefs, SchemaProvider, extract_refs
from .usage import (
    AccessMatrix,
    QueryLogEntry,
    UsageStats,
    Window,
    aggregate_usage,
    build_access_matrix,
    load_query_log,
)
from .validate import ValidationMode, ValidationReport, builtin_functions, validate

__all__ = [
    "AccessMatrix",
    "AmbiguousColumnError",
    "EmptySchema",
    "Query",
    "QueryLogEntry",
    "QueryRefs",
    "SchemaProvider",
    "Span",
    "SqlSyntaxError",
    "UsageStats",
    "ValidationMode",
    "ValidationReport",
    "Window",
    "aggregate_usage",
    "build_access_matrix",
    "builtin_functions",
    "extract_refs",
    "load_query_log",
    "parse",
    "render",
    "validate",
]

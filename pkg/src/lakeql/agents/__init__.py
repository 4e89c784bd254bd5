"""Query-writing agent: ranking, writing, and the validation/fix loop."""

from .pipeline import QueryWriterAgent
from .prompts import load_asset, load_template, render_schema
from .types import (
    MAX_FIX_ITERATIONS,
    PipelineResult,
    QueryDraft,
    RankedColumns,
    RankedTable,
    ResearchFinding,
    ToolCall,
)

__all__ = [
    "MAX_FIX_ITERATIONS",
    "PipelineResult",
    "QueryDraft",
    "QueryWriterAgent",
    "RankedColumns",
    "RankedTable",
    "ResearchFinding",
    "ToolCall",
    "load_asset",
    "load_template",
    "render_schema",
]

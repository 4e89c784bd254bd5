"""HTTP service and CLI."""

from .app import create_app, sse_frame

__all__ = ["create_app", "sse_frame"]

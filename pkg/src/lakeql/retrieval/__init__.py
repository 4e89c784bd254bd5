"""Context retrieval: embedding providers and the high-recall merge."""

from .context import PROVENANCE_ORDER, RetrievedContext, RetrievedTable, Retriever
from .embedder import DeterministicEmbedder, Embedder, HttpEmbedder

__all__ = [
    "DeterministicEmbedder",
    "Embedder",
    "HttpEmbedder",
    "PROVENANCE_ORDER",
    "RetrievedContext",
    "RetrievedTable",
    "Retriever",
]

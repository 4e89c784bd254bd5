"""Embedding providers.

The deterministic embedder is the offline/test provider: a signed
hashing-trick bag of tokens. Hash function: SHA-256 over ``salt + token``;
the first 4 bytes (big-endian) mod D pick the bucket, and bit 0 of byte 4
picks the sign. Same text always yields the same unit vector, on every
platform.
"""

from __future__ import annotations

import hashlib
import re
from typing import Protocol, Sequence

import numpy as np

DEFAULT_DIM = 256
DEFAULT_SALT = "lakeql-embed-v1"

_TOKEN_RE = re.compile(r"[a-z0-9]+")


class Embedder(Protocol):
    """Capability contract: fixed-dimension, L2-normalized text embeddings."""

    name: str
    dim: int

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        """Embed texts into an array of shape (len(texts), dim)."""

    def embed_one(self, text: str) -> np.ndarray: ...


class DeterministicEmbedder:
    """Signed token-hashing embedder; see module docstring for the scheme."""

    def __init__(self, dim: int = DEFAULT_DIM, salt: str = DEFAULT_SALT):
        self.dim = dim
        self.salt = salt
        self.name = f"deterministic-{dim}"
        self._token_cache: dict[str, tuple[int, float]] = {}

    def _bucket(self, token: str) -> tuple[int, float]:
        cached = self._token_cache.get(token)
        if cached is None:
            digest = hashlib.sha256((self.salt + token).encode("utf-8")).digest()
            index = int.from_bytes(digest[:4], "big") % self.dim
            sign = 1.0 if digest[4] & 1 else -1.0
            cached = (index, sign)
            self._token_cache[token] = cached
        return cached

    def embed_one(self, text: str) -> np.ndarray:
        vector = np.zeros(self.dim, dtype=np.float64)
        for token in _TOKEN_RE.findall(text.lower()):
            index, sign = self._bucket(token)
            vector[index] += sign
        norm = np.linalg.norm(vector)
        if norm > 0:
            vector /= norm
        return vector

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        return np.stack([self.embed_one(text) for text in texts])

    @staticmethod
    def usable(vector: np.ndarray) -> bool:
        """Zero vectors (no tokens) are flagged unusable for search."""
        return bool(np.linalg.norm(vector) > 0)


class HttpEmbedder:
    """OpenAI-compatible ``/embeddings`` endpoint client."""

    def __init__(self, endpoint: str, model: str, api_key: str = "", dim: int = DEFAULT_DIM):
        self.endpoint = endpoint.rstrip("/")
        self.model = model
        self.api_key = api_key
        self.dim = dim
        self.name = f"http-{model}"

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        import httpx

        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        response = httpx.post(
            f"{self.endpoint}/embeddings",
            json={"model": self.model, "input": list(texts)},
            headers=headers,
            timeout=60.0,
        )
        response.raise_for_status()
        rows = sorted(response.json()["data"], key=lambda row: row["index"])
        vectors = np.asarray([row["embedding"] for row in rows], dtype=np.float64)
        norms = np.linalg.norm(vectors, axis=1, keepdims=True)
        norms[norms == 0] = 1.0
        return vectors / norms

    def embed_one(self, text: str) -> np.ndarray:
        return self.embed([text])[0]

    @staticmethod
    def usable(vector: np.ndarray) -> bool:
        return bool(np.linalg.norm(vector) > 0)

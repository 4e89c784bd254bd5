"""Chat-completion providers: the deterministic scripted stub used by every
test, and an HTTP client for OpenAI-compatible endpoints.

The scripted provider looks a response up by (role, match key). The match
key is extracted from the prompt: a ``[fixture:TAG]`` line wins, otherwise
the first ``Question: ...`` line. A miss is a loud configuration error,
never a silent default.
"""

from __future__ import annotations

import json
import logging
import re
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

logger = logging.getLogger(__name__)

_FIXTURE_RE = re.compile(r"^\[fixture:([^\]]+)\]\s*$", re.MULTILINE)
_QUESTION_RE = re.compile(r"^Question:\s*(.+)$", re.MULTILINE)


class ProviderError(Exception):
    """Transport-level failure after retries were exhausted."""


class ScriptMissError(Exception):
    """No scripted response for (role, match key): a test-configuration bug."""

    def __init__(self, role: str, match_key: str):
        super().__init__(f"no scripted response for role={role!r} key={match_key!r}")
        self.role = role
        self.match_key = match_key


@dataclass(frozen=True)
class ChatMessage:
    role: str  # system | user | assistant
    content: str


@dataclass(frozen=True)
class ChatRequest:
    role: str  # pipeline role: table_ranker, query_writer, judge, ...
    messages: tuple[ChatMessage, ...]
    tier: str = "default"
    json_response: bool = True
    temperature: float = 0.0  # fixed; providers must not override

    @property
    def prompt_text(self) -> str:
        return "\n".join(m.content for m in self.messages)


@dataclass
class ChatResponse:
    text: str
    usage: dict = field(default_factory=dict)
    latency: float = 0.0
    retries: int = 0


def extract_match_key(prompt: str) -> str:
    """Match-key extraction shared by the scripted provider and script files."""
    fixture = _FIXTURE_RE.search(prompt)
    if fixture:
        return fixture.group(1).strip()
    question = _QUESTION_RE.search(prompt)
    if question:
        return question.group(1).strip()
    return ""


class ScriptedProvider:
    """Replays canned responses keyed by (role, match key).

    A script entry carries either ``response`` (one payload: a string used
    verbatim, or an object serialized to JSON text) or ``responses`` (a
    sequence consumed in order across repeated calls; the last one repeats).
    """

    def __init__(self, entries: Sequence[dict] = ()):
        self._responses: dict[tuple[str, str], list[str]] = {}
        self._cursor: dict[tuple[str, str], int] = {}
        for entry in entries:
            if "responses" in entry:
                self.add_sequence(entry["role"], entry["match_key"], entry["responses"])
            else:
                self.add(entry["role"], entry["match_key"], entry["response"])

    @classmethod
    def from_file(cls, path: str | Path) -> "ScriptedProvider":
        entries = []
        with open(path, encoding="utf-8") as handle:
            for line in handle:
                line = line.strip()
                if line:
                    entries.append(json.loads(line))
        return cls(entries)

    def add(self, role: str, match_key: str, response) -> None:
        self.add_sequence(role, match_key, [response])

    def add_sequence(self, role: str, match_key: str, responses: Sequence) -> None:
        rendered = [
            item if isinstance(item, str) else json.dumps(item, sort_keys=True)
            for item in responses
        ]
        self._responses.setdefault((role, match_key), []).extend(rendered)

    def reset(self) -> None:
        """Rewind all response sequences (start of a fresh run)."""
        self._cursor.clear()

    def complete(self, request: ChatRequest) -> ChatResponse:
        key = (request.role, extract_match_key(request.prompt_text))
        variants = self._responses.get(key)
        if variants is None:
            raise ScriptMissError(*key)
        index = self._cursor.get(key, 0)
        self._cursor[key] = index + 1
        text = variants[min(index, len(variants) - 1)]
        return ChatResponse(text=text)


class HttpProvider:
    """OpenAI-compatible chat-completions client with bounded retry."""

    MAX_RETRIES = 2

    def __init__(
        self,
        endpoint: str,
        api_key: str = "",
        model_map: dict[str, str] | None = None,
        timeout: float = 120.0,
    ):
        self.endpoint = endpoint.rstrip("/")
        self.api_key = api_key
        self.model_map = model_map or {}
        self.timeout = timeout

    def complete(self, request: ChatRequest) -> ChatResponse:
        import httpx

        model = self.model_map.get(request.tier, request.tier)
        payload = {
            "model": model,
            "messages": [
                {"role": m.role, "content": m.content} for m in request.messages
            ],
            "temperature": 0,
        }
        if request.json_response:
            payload["response_format"] = {"type": "json_object"}
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"

        last_error: Exception | None = None
        started = time.monotonic()
        for attempt in range(self.MAX_RETRIES + 1):
            if attempt:
                time.sleep(0.5 * (2 ** (attempt - 1)))
            try:
                response = httpx.post(
                    f"{self.endpoint}/chat/completions",
                    json=payload,
                    headers=headers,
                    timeout=self.timeout,
                )
            except httpx.HTTPError as exc:
                last_error = exc
                continue
            if response.status_code == 429 or response.status_code >= 500:
                last_error = ProviderError(
                    f"provider returned {response.status_code}"
                )
                continue
            response.raise_for_status()
            body = response.json()
            return ChatResponse(
                text=body["choices"][0]["message"]["content"],
                usage=body.get("usage", {}),
                latency=time.monotonic() - started,
                retries=attempt,
            )
        raise ProviderError(f"retries exhausted: {last_error}")

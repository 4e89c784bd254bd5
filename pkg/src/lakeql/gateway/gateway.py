"""Uniform boundary for chat completions: role-to-tier mapping, JSON
parsing, and per-run ledger registry."""

from __future__ import annotations

import json
import re
import time
from typing import Any

from .ledger import CallLedger
from .providers import ChatMessage, ChatRequest, ChatResponse

_FENCE_RE = re.compile(r"```(?:json)?\s*\n(.*?)\n\s*```", re.DOTALL)


def parse_json_response(text: str) -> Any | None:
    """Parse an LLM response as JSON, tolerating markdown fences."""
    candidate = text.strip()
    fenced = _FENCE_RE.search(candidate)
    if fenced:
        candidate = fenced.group(1)
    try:
        return json.loads(candidate)
    except json.JSONDecodeError:
        return None


class LlmGateway:
    """Wraps a provider with role-based model tiers and call accounting.

    Temperature is pinned at 0 for every call. Ledgers are per run and
    isolated; concurrent runs never share tallies. ``max_in_flight`` bounds
    concurrent provider requests across all sessions.
    """

    def __init__(
        self,
        provider,
        model_tiers: dict[str, str] | None = None,
        max_in_flight: int = 8,
    ):
        import threading

        self.provider = provider
        self.model_tiers = model_tiers or {}
        self._ledgers: dict[str, CallLedger] = {}
        self._in_flight = threading.Semaphore(max_in_flight)

    def tier_for(self, role: str) -> str:
        return self.model_tiers.get(role, self.model_tiers.get("default", "default"))

    def complete(
        self,
        role: str,
        prompt: str,
        ledger: CallLedger,
        system: str | None = None,
        json_response: bool = True,
    ) -> ChatResponse:
        messages = []
        if system:
            messages.append(ChatMessage("system", system))
        messages.append(ChatMessage("user", prompt))
        request = ChatRequest(
            role=role,
            messages=tuple(messages),
            tier=self.tier_for(role),
            json_response=json_response,
        )
        started = time.monotonic()
        with self._in_flight:
            response = self.provider.complete(request)
        ledger.record_llm(role, request.tier, time.monotonic() - started)
        return response

    def new_ledger(self, run_id: str) -> CallLedger:
        ledger = CallLedger(run_id=run_id)
        self._ledgers[run_id] = ledger
        return ledger

    def ledger_snapshot(self, run_id: str) -> CallLedger:
        ledger = self._ledgers.get(run_id)
        if ledger is None:
            return CallLedger(run_id=run_id)
        return ledger.snapshot()


class FormatError(Exception):
    """LLM response failed JSON parsing even after the format re-ask."""

    def __init__(self, role: str, text: str):
        super().__init__(f"{role}: response is not valid JSON")
        self.role = role
        self.text = text


FORMAT_REMINDER = (
    "\n\nReminder: respond with valid JSON only, matching the requested "
    "schema exactly. No prose, no markdown fences."
)


def complete_json(
    gateway: LlmGateway,
    role: str,
    prompt: str,
    ledger: CallLedger,
    system: str | None = None,
) -> Any:
    """One call plus at most one format re-ask; raises FormatError after."""
    response = gateway.complete(role, prompt, ledger, system=system)
    parsed = parse_json_response(response.text)
    if parsed is not None:
        return parsed
    retry = gateway.complete(role, prompt + FORMAT_REMINDER, ledger, system=system)
    parsed = parse_json_response(retry.text)
    if parsed is not None:
        return parsed
    raise FormatError(role, retry.text)

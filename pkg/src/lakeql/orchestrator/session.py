"""Chat sessions: append-only history, cached agent state for fast
follow-ups, and an optional NDJSON journal for replay tests."""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from pathlib import Path

from lakeql.agents.types import PipelineResult
from lakeql.retrieval.context import RetrievedContext


@dataclass(frozen=True)
class Attachment:
    """A failed query execution forwarded from the SQL editor."""

    sql: str
    error: str = ""


@dataclass(frozen=True)
class UserMessage:
    text: str
    attachment: Attachment | None = None
    selected_tables: tuple[str, ...] = ()

    @classmethod
    def from_json(cls, raw: dict) -> "UserMessage":
        attachment = None
        if raw.get("attachments"):
            att = raw["attachments"]
            attachment = Attachment(sql=att.get("sql", ""), error=att.get("error", ""))
        return cls(
            text=raw.get("text", ""),
            attachment=attachment,
            selected_tables=tuple(
                str(t).lower() for t in raw.get("selected_tables", ())
            ),
        )


@dataclass
class Turn:
    role: str  # user | bot
    content: str
    payload: dict | None = None


@dataclass
class Session:
    id: str
    user: str
    product_areas: tuple[str, ...]
    history: list[Turn] = field(default_factory=list)
    last_context: RetrievedContext | None = None
    last_result: PipelineResult | None = None
    last_table_output: tuple[str, ...] = ()  # keys shown with checkboxes
    turn_lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def append(self, turn: Turn) -> None:
        self.history.append(turn)

    def set_product_areas(self, areas: tuple[str, ...]) -> None:
        """Changing areas mid-session invalidates cached retrieval context."""
        if areas != self.product_areas:
            self.product_areas = areas
            self.last_context = None
            self.last_result = None
            self.last_table_output = ()

    def history_text(self, limit: int = 6) -> str:
        lines = [
            f"{turn.role}: {turn.content}" for turn in self.history[-limit:]
        ]
        return "\n".join(lines)


class SessionStore:
    """In-memory session registry with deterministic sequential ids."""

    def __init__(self, journal_path: str | Path | None = None):
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()
        self._counter = 0
        self.journal_path = Path(journal_path) if journal_path else None

    def create(self, user: str, product_areas: tuple[str, ...]) -> Session:
        with self._lock:
            self._counter += 1
            session = Session(
                id=f"s-{self._counter:04d}", user=user, product_areas=product_areas
            )
            self._sessions[session.id] = session
        self.journal({"type": "session", "id": session.id, "user": user,
                      "product_areas": list(product_areas)})
        return session

    def get(self, session_id: str) -> Session | None:
        return self._sessions.get(session_id)

    def journal(self, record: dict) -> None:
        if self.journal_path is None:
            return
        with self._lock:
            with open(self.journal_path, "a", encoding="utf-8") as handle:
                handle.write(json.dumps(record, sort_keys=True) + "\n")

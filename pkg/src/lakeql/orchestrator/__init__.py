"""Multi-agent chat orchestration: sessions, intents, and routing."""

from .engine import Engine, build_embedder
from .qa import QaAgent, QaAnswer
from .router import BotResponse, Intent, Orchestrator, report_to_json
from .session import Attachment, Session, SessionStore, Turn, UserMessage

__all__ = [
    "Attachment",
    "BotResponse",
    "Engine",
    "Intent",
    "Orchestrator",
    "QaAgent",
    "QaAnswer",
    "Session",
    "SessionStore",
    "Turn",
    "UserMessage",
    "build_embedder",
    "report_to_json",
]

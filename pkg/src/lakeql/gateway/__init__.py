"""Provider boundary for chat completions and central call accounting."""

from .gateway import (
    FORMAT_REMINDER,
    FormatError,
    LlmGateway,
    complete_json,
    parse_json_response,
)
from .ledger import CallLedger, CallRecord
from .providers import (
    ChatMessage,
    ChatRequest,
    ChatResponse,
    HttpProvider,
    ProviderError,
    ScriptedProvider,
    ScriptMissError,
    extract_match_key,
)

__all__ = [
    "CallLedger",
    "CallRecord",
    "ChatMessage",
    "ChatRequest",
    "ChatResponse",
    "FORMAT_REMINDER",
    "FormatError",
    "HttpProvider",
    "LlmGateway",
    "ProviderError",
    "ScriptMissError",
    "ScriptedProvider",
    "complete_json",
    "extract_match_key",
    "parse_json_response",
]

"""Central call accounting: LLM calls, embedding calls, EBR index lookups,
and database-equivalent queries (validator runs plus metadata fetches)."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field


@dataclass(frozen=True)
class CallRecord:
    kind: str  # llm | embedding | ebr | db
    role: str
    tier: str = ""
    duration: float = 0.0


@dataclass
class CallLedger:
    """Per-run tallies; totals always equal the sum of per-call records."""

    run_id: str = ""
    llm_calls: int = 0
    embedding_calls: int = 0
    ebr_queries: int = 0
    db_queries: int = 0
    validator_calls: int = 0
    records: list[CallRecord] = field(default_factory=list)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def record_llm(self, role: str, tier: str = "", duration: float = 0.0) -> None:
        with self._lock:
            self.llm_calls += 1
            self.records.append(CallRecord("llm", role, tier, duration))

    def record_embedding(self, role: str = "embed") -> None:
        with self._lock:
            self.embedding_calls += 1
            self.records.append(CallRecord("embedding", role))

    def record_ebr(self, role: str, lookups: int = 1) -> None:
        with self._lock:
            self.ebr_queries += lookups
            for _ in range(lookups):
                self.records.append(CallRecord("ebr", role))

    def record_db(self, role: str, validator: bool = False) -> None:
        with self._lock:
            self.db_queries += 1
            if validator:
                self.validator_calls += 1
            self.records.append(CallRecord("db", role))

    def llm_calls_for(self, role: str) -> int:
        return sum(1 for r in self.records if r.kind == "llm" and r.role == role)

    def snapshot(self) -> "CallLedger":
        with self._lock:
            copy = CallLedger(run_id=self.run_id)
            copy.llm_calls = self.llm_calls
            copy.embedding_calls = self.embedding_calls
            copy.ebr_queries = self.ebr_queries
            copy.db_queries = self.db_queries
            copy.validator_calls = self.validator_calls
            copy.records = list(self.records)
            return copy

    def merge(self, other: "CallLedger") -> None:
        with self._lock:
            self.llm_calls += other.llm_calls
            self.embedding_calls += other.embedding_calls
            self.ebr_queries += other.ebr_queries
            self.db_queries += other.db_queries
            self.validator_calls += other.validator_calls
            self.records.extend(other.records)

    def consistent(self) -> bool:
        kinds = [r.kind for r in self.records]
        return (
            self.llm_calls == kinds.count("llm")
            and self.embedding_calls == kinds.count("embedding")
            and self.ebr_queries == kinds.count("ebr")
            and self.db_queries == kinds.count("db")
        )

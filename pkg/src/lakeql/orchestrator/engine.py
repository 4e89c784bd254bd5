"""Engine facade: wires catalog, retriever, gateway, agents, and sessions
into one object the server and CLI drive."""

from __future__ import annotations

from dataclasses import replace

from lakeql.agents.pipeline import ProgressFn, QueryWriterAgent, _no_progress
from lakeql.catalog import Catalog
from lakeql.config import EngineConfig
from lakeql.gateway import CallLedger, LlmGateway
from lakeql.retrieval.context import Retriever
from lakeql.retrieval.embedder import DeterministicEmbedder, HttpEmbedder

from .qa import QaAgent
from .router import BotResponse, Orchestrator
from .session import Session, SessionStore, UserMessage


def build_embedder(config: EngineConfig):
    if config.embedder == "http":
        return HttpEmbedder(
            endpoint=config.embedder_endpoint, model=config.embedder_model
        )
    return DeterministicEmbedder()


class Engine:
    def __init__(
        self,
        catalog: Catalog,
        config: EngineConfig,
        provider,
        journal_path=None,
    ):
        self.catalog = catalog
        self.config = config
        self.gateway = LlmGateway(provider, dict(config.models))
        self.retriever = Retriever(catalog, config)
        self.writer = QueryWriterAgent(catalog, self.retriever, self.gateway, config)
        self.qa = QaAgent(catalog, self.retriever, self.gateway, config)
        self.sessions = SessionStore(journal_path)
        self.orchestrator = Orchestrator(
            catalog, self.retriever, self.writer, self.qa,
            self.gateway, config, self.sessions,
        )
        if config.email_groups:
            catalog.set_email_groups(config.email_groups)
        self._turns = 0

    def with_config(self, config: EngineConfig) -> "Engine":
        """A new engine over the same catalog/provider with different
        switches (used by the ablation harness)."""
        return Engine(self.catalog, config, self.gateway.provider)

    def create_session(
        self, user: str, product_areas: tuple[str, ...] | None = None
    ) -> Session:
        if product_areas is None:
            # default product areas come from the org-chart config
            product_areas = tuple(self.config.default_areas_for(user))
        return self.sessions.create(user, product_areas)

    def handle(
        self,
        session: Session,
        message: UserMessage,
        progress: ProgressFn = _no_progress,
    ) -> tuple[BotResponse, CallLedger]:
        self._turns += 1
        ledger = self.gateway.new_ledger(f"turn-{self._turns:05d}")
        response = self.orchestrator.handle_message(session, message, ledger, progress)
        return response, ledger

    def run_pipeline(
        self,
        question: str,
        user: str,
        product_areas: tuple[str, ...] = (),
        progress: ProgressFn = _no_progress,
        ledger: CallLedger | None = None,
    ):
        """Direct pipeline access (no intent classification): what the
        benchmark harness drives."""
        self._turns += 1
        if ledger is None:
            ledger = self.gateway.new_ledger(f"run-{self._turns:05d}")
        return self.writer.run_pipeline(question, user, product_areas, ledger, progress)

"""Engine configuration: one JSON document merging all module settings.

Knowledge and modeling switches mirror the ablation grid; the benchmark
harness overrides them per named configuration.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

DEFAULT_K_RET = 20
DEFAULT_K_EXAMPLES = 5
DEFAULT_K_RNK = 7


@dataclass(frozen=True)
class KnowledgeSwitches:
    popularity_joins: bool = True
    domain_knowledge_jargon: bool = True
    examples: bool = True
    table_column_attributes: bool = True
    table_clusters: bool = True


@dataclass(frozen=True)
class ModelingSwitches:
    researcher: bool = True
    fixer: bool = True
    rankers: bool = True


@dataclass(frozen=True)
class ClusteringConfig:
    n_components: int | None = None  # None: derived from matrix shape
    t_c: int = 20
    min_total: int = 10
    min_unique: int = 3
    seed: int = 0
    tolerance: float = 1e-4
    max_iterations: int = 200


@dataclass(frozen=True)
class EngineConfig:
    default_database: str = "default"
    k_ret: int = DEFAULT_K_RET
    k_examples: int = DEFAULT_K_EXAMPLES
    k_rnk: int = DEFAULT_K_RNK
    common_joins_k: int = 3
    max_fix_iterations: int = 2
    researcher_tool_budget: int = 6
    reflection_revisions: int = 1
    qa_simple_tool_budget: int = 2
    qa_complex_tool_budget: int = 6
    knowledge: KnowledgeSwitches = field(default_factory=KnowledgeSwitches)
    modeling: ModelingSwitches = field(default_factory=ModelingSwitches)
    models: dict = field(default_factory=dict)  # role -> model tier
    embedder: str = "deterministic"  # deterministic | http
    embedder_endpoint: str = ""
    embedder_model: str = ""
    user_areas: dict = field(default_factory=dict)  # org chart: user -> [areas]
    email_groups: dict = field(default_factory=dict)  # group -> [users]
    clustering: ClusteringConfig = field(default_factory=ClusteringConfig)
    docs_dir: str = ""  # wiki corpus for the question-answering agent

    def with_switches(
        self,
        knowledge: KnowledgeSwitches | None = None,
        modeling: ModelingSwitches | None = None,
    ) -> "EngineConfig":
        return replace(
            self,
            knowledge=knowledge or self.knowledge,
            modeling=modeling or self.modeling,
        )

    def default_areas_for(self, user: str) -> list[str]:
        return list(self.user_areas.get(user, []))


def load_config(path: str | Path) -> EngineConfig:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    return config_from_dict(raw)


def config_from_dict(raw: dict) -> EngineConfig:
    retrieval = raw.get("retrieval", {})
    agents = raw.get("agents", {})
    return EngineConfig(
        default_database=raw.get("default_database", "default"),
        k_ret=int(retrieval.get("k_ret", DEFAULT_K_RET)),
        k_examples=int(retrieval.get("k_examples", DEFAULT_K_EXAMPLES)),
        k_rnk=int(agents.get("k_rnk", DEFAULT_K_RNK)),
        common_joins_k=int(retrieval.get("common_joins_k", 3)),
        max_fix_iterations=int(agents.get("max_fix_iterations", 2)),
        researcher_tool_budget=int(agents.get("researcher_tool_budget", 6)),
        reflection_revisions=int(agents.get("reflection_revisions", 1)),
        qa_simple_tool_budget=int(agents.get("qa_simple_tool_budget", 2)),
        qa_complex_tool_budget=int(agents.get("qa_complex_tool_budget", 6)),
        knowledge=KnowledgeSwitches(**raw.get("knowledge", {})),
        modeling=ModelingSwitches(**raw.get("modeling", {})),
        models=dict(raw.get("models", {})),
        embedder=retrieval.get("embedder", "deterministic"),
        embedder_endpoint=retrieval.get("embedder_endpoint", ""),
        embedder_model=retrieval.get("embedder_model", ""),
        user_areas=dict(raw.get("org", {}).get("user_areas", {})),
        email_groups=dict(raw.get("org", {}).get("email_groups", {})),
        clustering=ClusteringConfig(**raw.get("clustering", {})),
        docs_dir=raw.get("docs_dir", ""),
    )

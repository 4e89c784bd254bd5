"""The named ablation grid: knowledge-graph and modeling switch sets."""

from __future__ import annotations

from dataclasses import dataclass, replace

from lakeql.config import EngineConfig, KnowledgeSwitches, ModelingSwitches


@dataclass(frozen=True)
class AblationConfig:
    name: str
    description: str
    knowledge: KnowledgeSwitches
    modeling: ModelingSwitches

    def apply(self, config: EngineConfig) -> EngineConfig:
        return replace(config, knowledge=self.knowledge, modeling=self.modeling)


_ALL_ON = KnowledgeSwitches()
_MODEL_ON = ModelingSwitches()

_A5 = replace(_ALL_ON, popularity_joins=False)
_A4 = replace(_A5, domain_knowledge_jargon=False)
_A3 = replace(_A4, examples=False)
_A2 = replace(_A3, table_column_attributes=False)
_A1 = replace(_A2, table_clusters=False)

_B3 = replace(_MODEL_ON, researcher=False)
_B2 = replace(_B3, fixer=False)
_B1 = replace(_B2, rankers=False)

NAMED_CONFIGS: dict[str, AblationConfig] = {
    "Full": AblationConfig("Full", "All components", _ALL_ON, _MODEL_ON),
    "A.5": AblationConfig("A.5", "Full w/o popularity or joins", _A5, _MODEL_ON),
    "A.4": AblationConfig("A.4", "A.5 w/o domain knowledge or jargon", _A4, _MODEL_ON),
    "A.3": AblationConfig("A.3", "A.4 w/o example queries", _A3, _MODEL_ON),
    "A.2": AblationConfig("A.2", "A.3 w/o table or column attributes", _A2, _MODEL_ON),
    "A.1": AblationConfig("A.1", "A.2 w/o table clusters (schemas only)", _A1, _MODEL_ON),
    "B.3": AblationConfig("B.3", "Full w/o researcher agent", _ALL_ON, _B3),
    "B.2": AblationConfig("B.2", "B.3 w/o query fixer", _ALL_ON, _B2),
    "B.1": AblationConfig("B.1", "B.2 w/o rankers (EBR, writer only)", _ALL_ON, _B1),
    "C.4": AblationConfig("C.4", "(A.4, B.3) combination", _A4, _B3),
    "C.3": AblationConfig("C.3", "(A.3, B.2) combination", _A3, _B2),
    "C.2": AblationConfig("C.2", "(A.2, B.1) combination", _A2, _B1),
    "C.1": AblationConfig("C.1", "(A.1, B.1) combination", _A1, _B1),
}

GRID_ORDER = (
    "Full", "A.5", "A.4", "A.3", "A.2", "A.1",
    "B.3", "B.2", "B.1", "C.4", "C.3", "C.2", "C.1",
)


def get_config(name: str) -> AblationConfig:
    try:
        return NAMED_CONFIGS[name]
    except KeyError:
        raise ValueError(
            f"unknown ablation config {name!r}; known: {', '.join(GRID_ORDER)}"
        ) from None

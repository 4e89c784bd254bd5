"""Rubric-prompted quality scoring of generated queries."""

from __future__ import annotations

import logging
from dataclasses import dataclass

from lakeql.agents import prompts
from lakeql.gateway import CallLedger, FormatError, LlmGateway, complete_json

from .cases import BenchmarkCase

logger = logging.getLogger(__name__)

ASPECTS = ("tables", "columns", "joins", "filters", "aggregations", "efficiency", "readability")


@dataclass(frozen=True)
class JudgeScore:
    overall: int  # 1-5
    aspects: dict  # aspect -> "ok" | "incorrect"
    rationale: str = ""

    def __post_init__(self):
        if not 1 <= self.overall <= 5:
            raise ValueError(f"overall score out of range: {self.overall}")


def load_rubric() -> str:
    return prompts.load_asset("judge_rubric")


def judge(
    case: BenchmarkCase,
    response_sql: str,
    gateway: LlmGateway,
    ledger: CallLedger,
    rubric: str | None = None,
) -> JudgeScore | None:
    """One LLM call (with one format re-ask); None means the case could not
    be judged and is excluded from score aggregates."""
    prompt = prompts.load_template("judge").render(
        question=case.question,
        response_sql=response_sql or "(no query produced)",
        ground_truths="\n\n".join(gt.sql for gt in case.ground_truths),
        rubric=rubric or load_rubric(),
    )
    try:
        raw = complete_json(gateway, "judge", prompt, ledger)
    except FormatError:
        logger.warning("case %s: judge response unparseable; marked unjudged", case.id)
        return None
    try:
        overall = int(raw.get("overall"))
        aspects = {
            aspect: str(raw.get("aspects", {}).get(aspect, "ok"))
            for aspect in ASPECTS
        }
        return JudgeScore(overall, aspects, str(raw.get("rationale", "")))
    except (TypeError, ValueError):
        logger.warning("case %s: judge score malformed; marked unjudged", case.id)
        return None

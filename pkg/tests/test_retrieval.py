"""Retrieval: deterministic embedder contract, table mentions, the
three-source merge with provenance precedence, and counter accounting."""

from __future__ import annotations

from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lakeql.config import EngineConfig, KnowledgeSwitches
from lakeql.gateway import CallLedger
from lakeql.retrieval import DeterministicEmbedder, Retriever

from conftest import build_catalog, FIXTURES


@pytest.fixture(scope="module")
def cat():
    return build_catalog()


@pytest.fixture()
def retriever(cat):
    return Retriever(cat, EngineConfig(default_database="core"))


# --- deterministic embedder ---

def test_embed_normalization_invariance():
    embedder = DeterministicEmbedder()
    assert np.array_equal(embedder.embed_one("a b"), embedder.embed_one("A  b"))
    assert np.array_equal(embedder.embed_one("a,b!"), embedder.embed_one("a b"))


def test_embed_empty_is_unusable():
    embedder = DeterministicEmbedder()
    vector = embedder.embed_one("")
    assert not DeterministicEmbedder.usable(vector)
    assert np.all(vector == 0)


def test_embed_unit_norm():
    embedder = DeterministicEmbedder()
    for text in ("one", "two words", "weekly active users by country"):
        assert np.linalg.norm(embedder.embed_one(text)) == pytest.approx(1.0)


def test_embed_similarity_orders_related_texts():
    embedder = DeterministicEmbedder()
    base = embedder.embed_one("weekly active users")
    related = float(np.dot(base, embedder.embed_one("weekly active members")))
    unrelated = float(np.dot(base, embedder.embed_one("payment latency")))
    assert related > unrelated


def test_embed_batch_matches_single():
    embedder = DeterministicEmbedder()
    batch = embedder.embed(["alpha beta", "gamma"])
    assert np.array_equal(batch[0], embedder.embed_one("alpha beta"))
    assert batch.shape == (2, embedder.dim)


@given(st.text(max_size=60))
@settings(max_examples=60, deadline=None)
def test_embed_deterministic_and_normalized(text):
    embedder = DeterministicEmbedder()
    first = embedder.embed_one(text)
    second = DeterministicEmbedder().embed_one(text)
    assert np.array_equal(first, second)
    norm = np.linalg.norm(first)
    assert norm == pytest.approx(1.0) or norm == 0.0


# --- table mentions ---

def test_mention_fully_qualified(retriever):
    found = retriever.extract_table_mentions("use metrics.daily_active_users please")
    assert found == {"metrics.daily_active_users"}


def test_mention_bare_name_all_databases(retriever, cat):
    # 'users' exists only in core among live+deprecated tables? archive is users_old
    found = retriever.extract_table_mentions("join with users somehow")
    assert found == {"core.users"}


def test_mention_none(retriever):
    assert retriever.extract_table_mentions("no catalog names here") == set()


def test_mention_bare_name_multiple_databases():
    catalog = build_catalog(with_clusters=False, with_usage=False)
    catalog.ingest({
        "tables": [
            {"database_name": "a", "table_name": "events"},
            {"database_name": "b", "table_name": "events"},
        ],
        "columns": [],
    })
    retriever = Retriever(catalog, EngineConfig())
    assert retriever.extract_table_mentions("look at events") == {
        "a.events", "b.events",
    }


# --- retrieve_context ---

def test_retrieve_counts_three_ebr_lookups(retriever):
    ledger = CallLedger()
    ctx = retriever.retrieve("signups by channel", "alice", ("growth",), ledger)
    assert ledger.ebr_queries == 3  # 2 example-index lookups + 1 table index
    assert ledger.embedding_calls == 1
    assert not ctx.is_empty


def test_examples_all_use_candidate_tables(retriever):
    ledger = CallLedger()
    ctx = retriever.retrieve(
        "daily active users by country", "erin", ("platform",), ledger
    )
    for example in ctx.examples:
        assert example.tables & ctx.candidate_tables


def test_mention_provenance_beats_ebr(retriever):
    ledger = CallLedger()
    ctx = retriever.retrieve(
        "use growth.signups_daily for signup counts", "alice", ("growth",), ledger
    )
    first = ctx.tables[0]
    assert first.node.key == "growth.signups_daily"
    assert first.provenance == "mention"


def test_mentions_exempt_from_candidate_filter(retriever):
    # sales tables are outside alice's candidate clusters, but an explicit
    # mention must still surface
    ledger = CallLedger()
    ctx = retriever.retrieve(
        "compare with sales.opportunities", "alice", ("growth",), ledger
    )
    keys = ctx.table_keys
    assert "sales.opportunities" in keys
    assert "sales.opportunities" not in ctx.candidate_tables


def test_k_ret_truncation(cat):
    config = EngineConfig(default_database="core", k_ret=1)
    retriever = Retriever(cat, config)
    ledger = CallLedger()
    ctx = retriever.retrieve(
        "use growth.signups_daily and anything else", "alice", ("growth",), ledger
    )
    assert len(ctx.tables) == 1
    assert ctx.tables[0].provenance == "mention"  # highest precedence wins


def test_unknown_user_diagnostic(retriever):
    ledger = CallLedger()
    ctx = retriever.retrieve("signup counts", "stranger", ("growth",), ledger)
    assert any("unknown user" in d for d in ctx.diagnostics)
    assert not ctx.is_empty  # area sources still apply


def test_empty_context_diagnostic(cat):
    config = EngineConfig(default_database="core")
    retriever = Retriever(cat, config)
    ledger = CallLedger()
    ctx = retriever.retrieve("anything", "stranger", (), ledger)
    assert ctx.is_empty
    assert "no candidate tables" in ctx.diagnostics


def test_retrieval_deterministic(retriever):
    first = retriever.retrieve("signups by channel", "alice", ("growth",), CallLedger())
    second = retriever.retrieve("signups by channel", "alice", ("growth",), CallLedger())
    assert first.table_keys == second.table_keys
    assert [e.id for e in first.examples] == [e.id for e in second.examples]
    assert first.jargon == second.jargon


def test_recall_monotone_in_candidates_unsaturated(cat):
    """Enlarging the candidate set never drops a table while the merged pool
    stays under K_ret."""
    config = EngineConfig(default_database="core", k_ret=20)
    retriever = Retriever(cat, config)

    ledger = CallLedger()
    small = retriever.retrieve("pipeline by stage", "carol", ("sales",), ledger)
    big = retriever.retrieve("pipeline by stage", "dave", ("sales",), ledger)
    assert small.candidate_tables <= big.candidate_tables
    assert len(big.tables) <= config.k_ret
    assert set(small.table_keys) <= set(big.table_keys)


def test_examples_switch_off_drops_lookups(cat):
    config = EngineConfig(default_database="core",
                          knowledge=KnowledgeSwitches(examples=False))
    retriever = Retriever(cat, config)
    ledger = CallLedger()
    ctx = retriever.retrieve("signups by channel", "alice", ("growth",), ledger)
    assert ledger.ebr_queries == 1
    assert ctx.examples == []


def test_clusters_switch_off_uses_all_live_tables(cat):
    config = EngineConfig(default_database="core",
                          knowledge=KnowledgeSwitches(table_clusters=False))
    retriever = Retriever(cat, config)
    ledger = CallLedger()
    ctx = retriever.retrieve("anything", "stranger", (), ledger)
    live = {k for k, n in cat.snapshot.tables.items() if not n.is_deprecated}
    assert ctx.candidate_tables == live


def test_attributes_switch_off_searches_schema_embeddings(cat):
    """With table/column attributes ablated, EBR runs over schema-text
    embeddings: a query matching only column names must win."""
    question = "week_start country active_users"  # column names, no descriptions
    base = EngineConfig(default_database="core",
                        knowledge=KnowledgeSwitches(table_clusters=False,
                                                    examples=False))
    schema_cfg = EngineConfig(
        default_database="core",
        knowledge=KnowledgeSwitches(table_clusters=False, examples=False,
                                    table_column_attributes=False),
    )
    embedder = cat.embedder
    vector = embedder.embed_one(question)
    snap = cat.snapshot
    attr_sim = float(np.dot(vector, snap.table_embeddings["metrics.weekly_active_users"]))
    schema_sim = float(np.dot(vector, snap.schema_embeddings["metrics.weekly_active_users"]))
    assert schema_sim > attr_sim  # the fixture makes the regimes distinguishable

    with_attrs = Retriever(cat, base).retrieve(question, "erin", (), CallLedger())
    schema_only = Retriever(cat, schema_cfg).retrieve(question, "erin", (), CallLedger())
    target = "metrics.weekly_active_users"
    ebr_rank = lambda ctx: [t.node.key for t in ctx.tables if t.provenance == "ebr"]
    assert ebr_rank(schema_only).index(target) <= ebr_rank(with_attrs).index(target)
    assert ebr_rank(schema_only)[0] == target


def test_knowledge_and_jargon_populated(retriever):
    ledger = CallLedger()
    ctx = retriever.retrieve(
        "what is our dau in the US", "erin", ("platform",), ledger
    )
    assert [r.id for r in ctx.knowledge] == ["kn-events-partition"]
    assert ("dau", "daily active users") in ctx.jargon


def test_columns_fetched_for_all_kept_tables(retriever):
    ledger = CallLedger()
    ctx = retriever.retrieve("signups by channel", "alice", ("growth",), ledger)
    assert set(ctx.columns) == set(ctx.table_keys)
    for key, columns in ctx.columns.items():
        assert columns, key

"""Shared fixtures: the desk corpus catalog, scripted provider, and engine."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from lakeql.catalog import Catalog
from lakeql.clustering import load_cluster_artifacts
from lakeql.config import config_from_dict, load_config
from lakeql.gateway import ScriptedProvider
from lakeql.orchestrator import Engine
from lakeql.sqlanalysis import Window, aggregate_usage, load_query_log

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.hookimpl(tryfirst=True, hookwrapper=True)
def pytest_runtest_makereport(item, call):
    # expose per-phase reports so the acceptance suite can print PASS/FAIL lines
    outcome = yield
    report = outcome.get_result()
    setattr(item, "rep_" + report.when, report)


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def engine_config():
    return load_config(FIXTURES / "config.json")


def build_catalog(with_clusters: bool = True, with_usage: bool = True) -> Catalog:
    catalog = Catalog()
    snapshot = json.loads((FIXTURES / "catalog_snapshot.json").read_text())
    summary = catalog.ingest(snapshot)
    assert not summary.errors, summary.errors
    if with_usage:
        entries = load_query_log(FIXTURES / "query_log.ndjson")
        stats = aggregate_usage(entries, catalog, Window(), default_database="core")
        catalog.apply_usage(stats)
    if with_clusters:
        model, user_clusters = load_cluster_artifacts(FIXTURES)
        catalog.apply_clusters(model, user_clusters)
    return catalog


@pytest.fixture(scope="session")
def catalog() -> Catalog:
    return build_catalog()


def build_engine(catalog: Catalog | None = None, config=None, journal_path=None) -> Engine:
    provider = ScriptedProvider.from_file(FIXTURES / "llm_script.ndjson")
    if catalog is None:
        catalog = build_catalog()
    if config is None:
        config = load_config(FIXTURES / "config.json")
    return Engine(catalog, config, provider, journal_path=journal_path)


@pytest.fixture()
def engine(catalog, engine_config) -> Engine:
    return build_engine(catalog, engine_config)

"""Command-line interface.

Subcommands: ``index`` (build catalog indexes from a snapshot + query logs),
``cluster`` (access-pattern clustering), ``serve`` (HTTP chat API + UI),
``bench`` (ablation benchmark), ``chat`` (terminal REPL over the same
session machinery).

Exit codes: 0 success, 1 usage error, 2 data error, 3 provider error.
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime
from pathlib import Path

from lakeql.catalog import Catalog, CatalogError, load_catalog, save_catalog
from lakeql.clustering import (
    AccessMatrix,
    InsufficientDataError,
    RankError,
    assign_user_clusters,
    cluster_datasets,
    default_n_components,
    filter_by_usage,
    save_cluster_artifacts,
)
from lakeql.config import EngineConfig, load_config
from lakeql.gateway import HttpProvider, ProviderError, ScriptedProvider, ScriptMissError
from lakeql.orchestrator import Engine, UserMessage
from lakeql.sqlanalysis import Window, aggregate_usage, build_access_matrix, load_query_log

USAGE_ERROR = 1
DATA_ERROR = 2
PROVIDER_ERROR = 3


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return USAGE_ERROR
    try:
        return args.handler(args)
    except (CatalogError, InsufficientDataError, RankError, FileNotFoundError,
            json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_ERROR
    except (ProviderError, ScriptMissError) as exc:
        print(f"provider error: {exc}", file=sys.stderr)
        return PROVIDER_ERROR


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lakeql")
    parser.set_defaults(command=None)
    sub = parser.add_subparsers(dest="command")

    p_index = sub.add_parser("index", help="ingest a catalog snapshot and query logs")
    p_index.add_argument("--snapshot", required=True, help="catalog snapshot JSON")
    p_index.add_argument("--logs", help="query log NDJSON")
    p_index.add_argument("--window-start", help="ISO date/time, inclusive")
    p_index.add_argument("--window-end", help="ISO date/time, exclusive")
    p_index.add_argument("--clusters", help="directory with cluster artifacts to attach")
    p_index.add_argument("--config", help="engine config JSON")
    p_index.add_argument("--out", required=True, help="output index directory")
    p_index.set_defaults(handler=cmd_index)

    p_cluster = sub.add_parser("cluster", help="cluster tables by user access patterns")
    p_cluster.add_argument("--matrix", help="NDJSON of {table, user, count} rows")
    p_cluster.add_argument("--logs", help="query log NDJSON (alternative to --matrix)")
    p_cluster.add_argument("--n-components", type=int, default=None)
    p_cluster.add_argument("--t-c", type=int, default=20)
    p_cluster.add_argument("--min-total", type=int, default=10)
    p_cluster.add_argument("--min-unique", type=int, default=3)
    p_cluster.add_argument("--seed", type=int, default=0)
    p_cluster.add_argument("--out", required=True)
    p_cluster.set_defaults(handler=cmd_cluster)

    p_serve = sub.add_parser("serve", help="start the HTTP chat API")
    p_serve.add_argument("--indexes", required=True, help="index directory from `index`")
    p_serve.add_argument("--config", help="engine config JSON")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8080)
    p_serve.add_argument("--provider", choices=("scripted", "http"), default="http")
    p_serve.add_argument("--script", help="scripted provider NDJSON")
    p_serve.add_argument("--endpoint", help="OpenAI-compatible endpoint URL")
    p_serve.add_argument("--api-key-env", default="LAKEQL_API_KEY")
    p_serve.add_argument("--ui", help="static UI directory to mount at /ui")
    p_serve.add_argument("--journal", help="session journal NDJSON path")
    p_serve.set_defaults(handler=cmd_serve)

    p_bench = sub.add_parser("bench", help="run the benchmark / ablation grid")
    p_bench.add_argument("--cases", required=True, help="benchmark NDJSON")
    p_bench.add_argument("--config", default="Full",
                         help="ablation name, comma list, or 'grid'")
    p_bench.add_argument("--engine-config", help="engine config JSON")
    p_bench.add_argument("--indexes", required=True)
    p_bench.add_argument("--provider", choices=("scripted", "http"), default="scripted")
    p_bench.add_argument("--script", help="scripted provider NDJSON")
    p_bench.add_argument("--endpoint", help="OpenAI-compatible endpoint URL")
    p_bench.add_argument("--api-key-env", default="LAKEQL_API_KEY")
    p_bench.add_argument("--no-judge", action="store_true")
    p_bench.add_argument("--out", help="report path (.txt, .csv, or .json)")
    p_bench.set_defaults(handler=cmd_bench)

    p_chat = sub.add_parser("chat", help="terminal chat REPL")
    p_chat.add_argument("--indexes", required=True)
    p_chat.add_argument("--config", help="engine config JSON")
    p_chat.add_argument("--user", required=True)
    p_chat.add_argument("--areas", nargs="*", default=None)
    p_chat.add_argument("--provider", choices=("scripted", "http"), default="http")
    p_chat.add_argument("--script")
    p_chat.add_argument("--endpoint")
    p_chat.add_argument("--api-key-env", default="LAKEQL_API_KEY")
    p_chat.set_defaults(handler=cmd_chat)

    return parser


def _load_engine_config(path: str | None) -> EngineConfig:
    return load_config(path) if path else EngineConfig()


def _build_provider(args) -> object:
    import os

    if args.provider == "scripted":
        if not args.script:
            raise ValueError("--script is required with --provider scripted")
        return ScriptedProvider.from_file(args.script)
    if not args.endpoint:
        raise ValueError("--endpoint is required with --provider http")
    return HttpProvider(args.endpoint, api_key=os.environ.get(args.api_key_env, ""))


def cmd_index(args) -> int:
    from lakeql.orchestrator import build_embedder

    config = _load_engine_config(args.config)
    catalog = Catalog(embedder=build_embedder(config))
    snapshot = json.loads(Path(args.snapshot).read_text(encoding="utf-8"))
    summary = catalog.ingest(snapshot)
    for error in summary.errors:
        print(f"record error: {error}", file=sys.stderr)
    if args.logs:
        window = Window(
            start=datetime.fromisoformat(args.window_start) if args.window_start else None,
            end=datetime.fromisoformat(args.window_end) if args.window_end else None,
        )
        entries = load_query_log(args.logs)
        stats = aggregate_usage(entries, catalog, window, config.default_database)
        catalog.apply_usage(stats)
        if stats.skipped:
            print(f"skipped {stats.skipped} unparseable log entries", file=sys.stderr)
    if args.clusters:
        from lakeql.clustering import load_cluster_artifacts

        model, user_clusters = load_cluster_artifacts(args.clusters)
        if config.email_groups:
            catalog.set_email_groups(config.email_groups)
        catalog.apply_clusters(model, user_clusters)
    manifest = save_catalog(catalog, args.out)
    print(json.dumps(manifest["counts"], sort_keys=True))
    return 0


def _matrix_from_pairs(path: str) -> AccessMatrix:
    pairs: dict[tuple[str, str], int] = {}
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            pairs[(row["table"].lower(), row["user"])] = int(row["count"])
    return AccessMatrix.from_pairs(pairs)


def cmd_cluster(args) -> int:
    if bool(args.matrix) == bool(args.logs):
        raise ValueError("exactly one of --matrix or --logs is required")
    if args.matrix:
        matrix = _matrix_from_pairs(args.matrix)
    else:
        matrix = build_access_matrix(load_query_log(args.logs))
    n_components = args.n_components or default_n_components(
        len(matrix.tables), len(matrix.users)
    )
    filtered = filter_by_usage(
        matrix, args.min_total, args.min_unique, n_components=n_components
    )
    model, ica = cluster_datasets(filtered, n_components, args.t_c, seed=args.seed)
    user_clusters = assign_user_clusters(filtered, model)
    save_cluster_artifacts(args.out, model, user_clusters)
    print(json.dumps({
        "clusters": len(model.cluster_ids),
        "tables": len(filtered.tables),
        "users": len(filtered.users),
        "converged": ica.converged,
        "iterations": ica.iterations,
    }, sort_keys=True))
    return 0


def _load_engine(args) -> Engine:
    from lakeql.orchestrator import build_embedder

    config = _load_engine_config(args.config)
    catalog = load_catalog(args.indexes, embedder=build_embedder(config))
    provider = _build_provider(args)
    journal = getattr(args, "journal", None)
    return Engine(catalog, config, provider, journal_path=journal)


def cmd_serve(args) -> int:
    import uvicorn

    from .app import create_app

    indexes = Path(args.indexes)
    if not (indexes / "manifest.json").exists():
        print(
            f"error: no indexes at {indexes}; run `lakeql index --snapshot ... "
            f"--out {indexes}` first",
            file=sys.stderr,
        )
        return DATA_ERROR
    engine = _load_engine(args)
    app = create_app(engine, ui_dir=args.ui)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def cmd_bench(args) -> int:
    from lakeql.bench import GRID_ORDER, get_config, load_cases, render, run_benchmark

    config = _load_engine_config(args.engine_config)
    catalog = load_catalog(args.indexes)
    provider = _build_provider(args)
    engine = Engine(catalog, config, provider)
    cases = load_cases(args.cases, catalog, config.default_database)
    if args.config == "grid":
        names = list(GRID_ORDER)
    else:
        names = [name.strip() for name in args.config.split(",") if name.strip()]
    reports = [
        run_benchmark(engine, cases, get_config(name), use_judge=not args.no_judge)
        for name in names
    ]
    fmt = "txt"
    if args.out:
        suffix = Path(args.out).suffix.lstrip(".")
        fmt = suffix or "txt"
    text = render(reports, fmt)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        print(text, end="")
    return 0


def cmd_chat(args) -> int:
    engine = _load_engine(args)
    session = engine.create_session(
        args.user, tuple(args.areas) if args.areas is not None else None
    )
    print(f"session {session.id} for {session.user} "
          f"(areas: {', '.join(session.product_areas) or 'none'})")
    print("type a question; 'exit' to quit")
    while True:
        try:
            line = input("> ").strip()
        except EOFError:
            break
        if line in ("exit", "quit"):
            break
        if not line:
            continue
        response, ledger = engine.handle(
            session,
            UserMessage(text=line),
            progress=lambda stage, text: print(f"  [{stage}] {text}"),
        )
        print(f"[{response.kind}] {response.text}")
        if response.kind == "query_output":
            print(response.payload["sql"])
        elif response.kind == "table_output":
            for row in response.payload["tables"]:
                print(f"  - {row['table']}: {row['description']}")
        elif response.kind == "answer":
            pass  # text already printed
        if response.quick_replies:
            print("suggestions: " + " | ".join(response.quick_replies))
    return 0


if __name__ == "__main__":
    sys.exit(main())

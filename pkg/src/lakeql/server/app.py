"""HTTP chat API: sessions, SSE progress streaming, knowledge submission,
certification, table search, and health.

Event streams are deterministic: payloads are JSON with sorted keys and no
timestamps, so a recorded session replays byte-identically against the same
catalog and scripted provider.
"""

from __future__ import annotations

import json
import logging
import queue
import threading
from typing import Iterator

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse, StreamingResponse
from fastapi.staticfiles import StaticFiles

from lakeql.catalog import CatalogError, NotFoundError
from lakeql.catalog.types import DomainKnowledgeRecord
from lakeql.gateway import ProviderError
from lakeql.orchestrator import Engine, UserMessage

logger = logging.getLogger(__name__)

_STREAM_END = object()


def sse_frame(event: str, payload: dict, seq: int) -> str:
    data = json.dumps({"seq": seq, **payload}, sort_keys=True)
    return f"event: {event}\ndata: {data}\n\n"


def create_app(engine: Engine, ui_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="lakeql", version="0.1.0")
    app.state.engine = engine

    @app.exception_handler(CatalogError)
    async def catalog_error(_request: Request, exc: CatalogError):
        return JSONResponse(status_code=400, content={"error": str(exc)})

    @app.post("/v1/sessions")
    def create_session(body: dict):
        user = body.get("user")
        if not user or not isinstance(user, str):
            raise HTTPException(400, detail="field 'user': required string")
        areas = body.get("product_areas")
        if areas is not None and not isinstance(areas, list):
            raise HTTPException(400, detail="field 'product_areas': must be a list")
        session = engine.create_session(
            user, tuple(areas) if areas is not None else None
        )
        return {
            "session_id": session.id,
            "user": session.user,
            "product_areas": list(session.product_areas),
        }

    @app.get("/v1/sessions/{session_id}")
    def get_session(session_id: str):
        session = engine.sessions.get(session_id)
        if session is None:
            raise HTTPException(404, detail=f"unknown session: {session_id}")
        return {
            "session_id": session.id,
            "user": session.user,
            "product_areas": list(session.product_areas),
            "history": [
                {"role": turn.role, "content": turn.content, "payload": turn.payload}
                for turn in session.history
            ],
        }

    @app.post("/v1/sessions/{session_id}/messages")
    def post_message(session_id: str, body: dict):
        session = engine.sessions.get(session_id)
        if session is None:
            raise HTTPException(404, detail=f"unknown session: {session_id}")
        if "text" not in body and "attachments" not in body and "selected_tables" not in body:
            raise HTTPException(400, detail="field 'text': required")
        if body.get("product_areas") is not None:
            session.set_product_areas(tuple(body["product_areas"]))
        message = UserMessage.from_json(body)

        events: queue.Queue = queue.Queue()
        frames: list[str] = []
        counter = {"seq": 0}

        def emit(event: str, payload: dict) -> None:
            counter["seq"] += 1
            events.put(sse_frame(event, payload, counter["seq"]))

        def worker() -> None:
            try:
                response, _ledger = engine.handle(
                    session, message,
                    progress=lambda stage, text: emit(
                        "progress", {"stage": stage, "text": text}
                    ),
                )
                emit("response", response.to_json())
            except ProviderError as exc:
                emit("error", {"text": f"provider unavailable: {exc}"})
            except Exception as exc:  # pragma: no cover - defensive
                logger.exception("message handling crashed")
                emit("error", {"text": str(exc)})
            finally:
                events.put(_STREAM_END)

        thread = threading.Thread(target=worker, daemon=True)
        thread.start()

        def stream() -> Iterator[str]:
            while True:
                item = events.get()
                if item is _STREAM_END:
                    break
                frames.append(item)
                yield item
            engine.sessions.journal({
                "type": "message",
                "session": session_id,
                "request": body,
                "events": frames,
            })

        return StreamingResponse(stream(), media_type="text/event-stream")

    @app.post("/v1/knowledge")
    def add_knowledge(body: dict):
        try:
            record = DomainKnowledgeRecord(
                id=body.get("id") or f"kn-{len(engine.catalog.snapshot.knowledge) + 1:04d}",
                text=body.get("text", ""),
                product_areas=frozenset(body.get("product_areas", ())),
                tables=frozenset(t.lower() for t in body.get("tables", ())),
                columns=frozenset(c.lower() for c in body.get("columns", ())),
                author=body.get("author"),
            )
            if not record.text:
                raise HTTPException(400, detail="field 'text': required")
            return {"id": engine.catalog.add_knowledge(record)}
        except CatalogError as exc:
            raise HTTPException(400, detail=str(exc))

    @app.post("/v1/examples/certify")
    def certify_example(body: dict):
        for field in ("sql", "description", "author"):
            if not body.get(field):
                raise HTTPException(400, detail=f"field {field!r}: required")
        try:
            example = engine.catalog.certify_example(
                sql=body["sql"],
                description=body["description"],
                author=body["author"],
                tables=body.get("tables"),
                default_database=engine.config.default_database,
            )
        except CatalogError as exc:
            raise HTTPException(400, detail=str(exc))
        return {
            "id": example.id,
            "tables": sorted(example.tables),
            "is_certified": example.is_certified,
        }

    @app.get("/v1/tables/search")
    def search_tables(q: str, k: int = 10):
        if k < 1:
            raise HTTPException(400, detail="field 'k': must be >= 1")
        vector = engine.retriever.embedder.embed_one(q)
        mentions = engine.retriever.extract_table_mentions(q)
        hits = engine.catalog.search_tables(vector, k=k)
        rows = []
        seen = set()
        for key in sorted(mentions):
            node = engine.catalog.get_table(key)
            rows.append(_table_row(engine, node, 1.0))
            seen.add(key)
        for node, score in hits:
            if node.key not in seen and len(rows) < k:
                rows.append(_table_row(engine, node, score))
        return {"tables": rows}

    @app.get("/v1/health")
    def health():
        snap = engine.catalog.snapshot
        return {
            "status": "ok",
            "built_at": snap.built_at,
            "counts": {
                "tables": len(snap.tables),
                "columns": sum(len(c) for c in snap.columns.values()),
                "examples": len(snap.examples),
                "knowledge": len(snap.knowledge),
                "jargon": len(snap.jargon),
                "clusters": (
                    len(snap.cluster_model.cluster_ids) if snap.cluster_model else 0
                ),
            },
        }

    if ui_dir:
        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


def _table_row(engine: Engine, node, score: float) -> dict:
    joins = engine.catalog.get_common_joins(node.key, engine.config.common_joins_k)
    return {
        "table": node.key,
        "description": node.description or "",
        "popularity": node.usage_popularity,
        "commonly_joined": [edge.partner_of(node.key) for edge in joins],
        "is_certified": node.is_certified,
        "is_deprecated": node.is_deprecated,
        "score": round(score, 6),
    }

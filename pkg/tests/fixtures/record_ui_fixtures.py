"""Re-records the frontend's scripted-backend fixture.

Run from the repo root: python tests/fixtures/record_ui_fixtures.py
Writes frontend/test/fixtures/recorded.json; refresh the vitest snapshots
afterwards (cd frontend && npx vitest run -u).
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))

from fastapi.testclient import TestClient

from conftest import build_engine
from lakeql.server import create_app

TURN_REQUESTS = [
    {"text": "Which tables have notification data?"},
    {"text": "Use the selected tables and write the query",
     "selected_tables": ["metrics.notification_ctr"]},
    {"text": "This query fails, fix it",
     "attachments": {
         "sql": "SELECT event_date, channel FROM metrics.notification_ctr WHERE",
         "error": "line 1: syntax error at end of input",
     }},
    {"text": "Explain the table core.users"},
]


def main() -> None:
    engine = build_engine()
    client = TestClient(create_app(engine))
    session = client.post("/v1/sessions", json={"user": "erin"}).json()

    turns = []
    for request in TURN_REQUESTS:
        with client.stream(
            "POST", f"/v1/sessions/{session['session_id']}/messages", json=request
        ) as response:
            raw = "".join(response.iter_text())
        turns.append({"request": request, "raw": raw})

    out = Path(__file__).parent.parent.parent / "frontend" / "test" / "fixtures" / "recorded.json"
    out.write_text(json.dumps({"session": session, "turns": turns},
                              indent=2, sort_keys=True), encoding="utf-8")
    print(f"recorded {len(turns)} turns -> {out}")


if __name__ == "__main__":
    main()

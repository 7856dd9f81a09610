"""Replay a recorded request/response fixture against the live app.

A selftest fixture is {"requests": [{method, path, body?}], "responses":
[...]}: with --record the current responses become the golden file,
without it any byte-level difference fails the test.  Catches model or
dependency drift before a service ships.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import List, Tuple

from fastapi.testclient import TestClient

from .app import create_app
from .model import MlmScorer

DEFAULT_REQUESTS = [
    {"method": "GET", "path": "/v1/info"},
    {"method": "POST", "path": "/v1/token_scores",
     "body": {"text": "the waiter came over."}},
    {"method": "POST", "path": "/v1/fill_mask",
     "body": {"text": "the [MASK] came over.", "mask_index": 1, "top_k": 5}},
    {"method": "POST", "path": "/v1/embed",
     "body": {"text": "the waiter came over."}},
]


def _play(client: TestClient, request: dict) -> Tuple[int, dict]:
    if request["method"] == "GET":
        response = client.get(request["path"])
    else:
        response = client.post(request["path"], json=request.get("body"))
    return response.status_code, response.json()


def run_selftest(scorer: MlmScorer, fixture_path, record: bool = False) -> List[str]:
    """Return a list of differences (empty means the selftest passed)."""
    fixture_path = Path(fixture_path)
    client = TestClient(create_app(scorer))
    if record or not fixture_path.exists():
        requests = DEFAULT_REQUESTS
        responses = [_play(client, r) for r in requests]
        fixture_path.write_text(json.dumps({
            "requests": requests,
            "responses": [{"status": s, "body": b} for s, b in responses],
        }, ensure_ascii=False, sort_keys=True, indent=2) + "\n", encoding="utf-8")
        return []
    fixture = json.loads(fixture_path.read_text(encoding="utf-8"))
    differences = []
    for request, golden in zip(fixture["requests"], fixture["responses"]):
        status, body = _play(client, request)
        if status != golden["status"]:
            differences.append(
                f"{request['path']}: status {status} != {golden['status']}")
        elif body != golden["body"]:
            differences.append(f"{request['path']}: body differs")
    return differences

"""Record service responses into a table fixture.

The output matches the table-backend fixture format of the evaluation
toolkit, so a recorded fixture replays a model's answers offline and
byte-exactly (floats round-trip through JSON unchanged).
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Sequence

import httpx

from .chunking import chunk_index
from .model import MASK_MARKER


def record_fixture(endpoint: str, texts: Sequence[str] = (),
                   masked_texts: Sequence[str] = (), top_k: int = 10,
                   timeout: float = 60.0) -> dict:
    """Query a running service and assemble a fixture dict.

    `texts` get token_scores + embed entries; `masked_texts` (each
    containing one mask marker) get fill_mask entries.
    """
    fixture = {"token_scores": {}, "fill_mask": [], "embed": {}}
    with httpx.Client(base_url=endpoint.rstrip("/"), timeout=timeout) as client:
        info = client.get("/v1/info")
        info.raise_for_status()
        payload = info.json()
        fixture["info"] = {
            "model_id": payload["model_id"],
            "max_tokens": payload["max_tokens"],
            "embedding_dim": payload["embedding_dim"],
        }
        for text in texts:
            response = client.post("/v1/token_scores", json={"text": text})
            response.raise_for_status()
            fixture["token_scores"][text] = response.json()
            response = client.post("/v1/embed", json={"text": text})
            response.raise_for_status()
            fixture["embed"][text] = response.json()["vector"]
        for text in masked_texts:
            mask_index = chunk_index(text, text.index(MASK_MARKER))
            response = client.post(
                "/v1/fill_mask",
                json={"text": text, "mask_index": mask_index, "top_k": top_k})
            response.raise_for_status()
            fixture["fill_mask"].append({
                "text": text,
                "mask_index": mask_index,
                "predictions": response.json()["predictions"],
            })
    return fixture


def split_corpus_lines(lines: Iterable[str]) -> tuple[list, list]:
    """Lines containing the mask marker become fill-mask queries."""
    texts, masked = [], []
    for line in lines:
        line = line.strip()
        if not line:
            continue
        (masked if MASK_MARKER in line else texts).append(line)
    return texts, masked


def write_fixture(fixture: dict, path) -> None:
    Path(path).write_text(
        json.dumps(fixture, ensure_ascii=False, sort_keys=True, indent=2) + "\n",
        encoding="utf-8")

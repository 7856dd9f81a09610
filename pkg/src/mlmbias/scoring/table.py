"""Deterministic table-driven backend.

A fixture is a JSON document with keys "token_scores", "fill_mask" and
"embed" (plus optional "info").  The backend answers exactly what the
fixture says and errors on anything else, which makes it the reference
oracle for every metric test: the whole primary pipeline runs against
it with no model and no network.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Dict, List, Tuple

import numpy as np

from ..errors import FixtureError, UnknownQueryError
from .base import BackendInfo, EmbeddingVector, MaskPrediction, ScorerBackend, TokenScore


class TableBackend(ScorerBackend):
    def __init__(self, data: dict, source: str = "<memory>"):
        self._source = source
        try:
            self._scores = self._parse_token_scores(data.get("token_scores", {}))
            self._masks = self._parse_fill_mask(data.get("fill_mask", []))
            self._embeds = self._parse_embed(data.get("embed", {}))
        except (ValueError, TypeError, AttributeError) as exc:
            raise FixtureError(f"{source}: invalid fixture: {exc}") from exc
        info = data.get("info", {})
        dims = {v.shape[0] for v in self._embeds.values()}
        if len(dims) > 1:
            raise FixtureError(f"{source}: embedding dimensions differ: {sorted(dims)}")
        self._info = BackendInfo(
            model_id=info.get("model_id", f"table:{source}"),
            max_tokens=int(info.get("max_tokens", 512)),
            embedding_dim=int(info.get("embedding_dim", dims.pop() if dims else 0)),
        )

    @classmethod
    def load(cls, path) -> "TableBackend":
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise FixtureError(f"cannot load fixture {path}: {exc}") from exc
        return cls(data, source=str(path))

    @staticmethod
    def _parse_token_scores(raw: dict) -> Dict[str, Tuple[TokenScore, ...]]:
        parsed = {}
        for text, entry in raw.items():
            tokens = entry["tokens"]
            log_probs = entry["log_probs"]
            attentions = entry["attentions"]
            if not (len(tokens) == len(log_probs) == len(attentions)):
                raise ValueError(f"unequal array lengths for {text!r}")
            parsed[text] = tuple(
                TokenScore(t, float(lp), float(at))
                for t, lp, at in zip(tokens, log_probs, attentions)
            )
        return parsed

    @staticmethod
    def _parse_fill_mask(raw: list) -> Dict[Tuple[str, int], Tuple[MaskPrediction, ...]]:
        parsed = {}
        for entry in raw:
            key = (entry["text"], int(entry["mask_index"]))
            preds = tuple(
                MaskPrediction(p["token"], float(p["prob"]))
                for p in entry["predictions"]
            )
            for a, b in zip(preds, preds[1:]):
                if b.prob > a.prob:
                    raise ValueError(
                        f"predictions for {key} not sorted descending by prob")
            parsed[key] = preds
        return parsed

    @staticmethod
    def _parse_embed(raw: dict) -> Dict[str, np.ndarray]:
        return {
            text: np.asarray(vec, dtype=np.float64)
            for text, vec in raw.items()
        }

    def token_scores(self, text: str) -> List[TokenScore]:
        try:
            return list(self._scores[text])
        except KeyError:
            raise UnknownQueryError(f"{self._source}: no token scores for {text!r}") from None

    def fill_mask(self, text: str, mask_index: int, top_k: int) -> List[MaskPrediction]:
        if top_k < 1:
            raise ValueError("top_k must be >= 1")
        try:
            preds = self._masks[(text, mask_index)]
        except KeyError:
            raise UnknownQueryError(
                f"{self._source}: no fill-mask entry for ({text!r}, {mask_index})") from None
        return list(preds[:top_k])

    def embed(self, text: str) -> EmbeddingVector:
        try:
            return self._embeds[text].copy()
        except KeyError:
            raise UnknownQueryError(f"{self._source}: no embedding for {text!r}") from None

    def info(self) -> BackendInfo:
        return self._info

    def to_data(self) -> dict:
        """Round-trippable fixture dict (load(dump(x)) answers identically)."""
        return {
            "info": {
                "model_id": self._info.model_id,
                "max_tokens": self._info.max_tokens,
                "embedding_dim": self._info.embedding_dim,
            },
            "token_scores": {
                text: {
                    "tokens": [s.token for s in scores],
                    "log_probs": [s.log_prob for s in scores],
                    "attentions": [s.attention for s in scores],
                }
                for text, scores in self._scores.items()
            },
            "fill_mask": [
                {
                    "text": text,
                    "mask_index": index,
                    "predictions": [{"token": p.token, "prob": p.prob} for p in preds],
                }
                for (text, index), preds in self._masks.items()
            ],
            "embed": {text: vec.tolist() for text, vec in self._embeds.items()},
        }


def dump_fixture(data: dict, path) -> None:
    """Write a fixture with a canonical serialization (stable bytes)."""
    Path(path).write_text(
        json.dumps(data, ensure_ascii=False, sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )

"""Memoizing wrapper so folds that share sentences score each one once."""

from __future__ import annotations

import threading
from typing import Dict, List, Tuple

from .base import BackendInfo, EmbeddingVector, MaskPrediction, ScorerBackend, TokenScore


class CachingBackend(ScorerBackend):
    def __init__(self, inner: ScorerBackend):
        self._inner = inner
        self._lock = threading.Lock()
        self._scores: Dict[str, List[TokenScore]] = {}
        self._masks: Dict[Tuple[str, int, int], List[MaskPrediction]] = {}
        self._embeds: Dict[str, EmbeddingVector] = {}

    def token_scores(self, text: str) -> List[TokenScore]:
        with self._lock:
            if text in self._scores:
                return list(self._scores[text])
        result = self._inner.token_scores(text)
        with self._lock:
            self._scores.setdefault(text, result)
        return list(result)

    def fill_mask(self, text: str, mask_index: int, top_k: int) -> List[MaskPrediction]:
        key = (text, mask_index, top_k)
        with self._lock:
            if key in self._masks:
                return list(self._masks[key])
        result = self._inner.fill_mask(text, mask_index, top_k)
        with self._lock:
            self._masks.setdefault(key, result)
        return list(result)

    def embed(self, text: str) -> EmbeddingVector:
        with self._lock:
            if text in self._embeds:
                return self._embeds[text].copy()
        result = self._inner.embed(text)
        with self._lock:
            self._embeds.setdefault(text, result)
        return result.copy()

    def info(self) -> BackendInfo:
        return self._inner.info()

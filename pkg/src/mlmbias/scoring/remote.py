"""HTTP client for an external scorer service.

Wire protocol (JSON over HTTP, UTF-8):
  POST /v1/token_scores {"text"}                      -> tokens/log_probs/attentions
  POST /v1/fill_mask    {"text","mask_index","top_k"} -> predictions desc by prob
  POST /v1/embed        {"text"}                      -> vector
  GET  /v1/info                                       -> model_id/max_tokens/embedding_dim

All requests are idempotent reads, so connection failures, timeouts and
5xx responses are retried with exponential backoff; 4xx responses carry
{"error": ...} and are surfaced immediately as typed errors.
"""

from __future__ import annotations

import json
import threading
import time
from typing import List

import httpx
import numpy as np

from ..errors import (
    BackendConnectionError,
    BackendRequestError,
    BackendTimeoutError,
    MalformedResponseError,
)
from .base import BackendInfo, EmbeddingVector, MaskPrediction, ScorerBackend, TokenScore


class RemoteBackend(ScorerBackend):
    def __init__(self, endpoint: str, timeout: float = 30.0, max_retries: int = 2,
                 max_inflight: int = 8, backoff_base: float = 0.1):
        self._endpoint = endpoint.rstrip("/")
        self._max_retries = max_retries
        self._backoff_base = backoff_base
        self._client = httpx.Client(base_url=self._endpoint, timeout=timeout)
        self._slots = threading.BoundedSemaphore(max_inflight)
        self._info: BackendInfo | None = None

    @classmethod
    def connect(cls, endpoint: str, timeout: float = 30.0, max_retries: int = 2,
                max_inflight: int = 8, backoff_base: float = 0.1) -> "RemoteBackend":
        """Create a client and fetch /v1/info so unreachable endpoints
        fail fast."""
        backend = cls(endpoint, timeout=timeout, max_retries=max_retries,
                      max_inflight=max_inflight, backoff_base=backoff_base)
        backend.info()
        return backend

    def close(self) -> None:
        self._client.close()

    def _request(self, method: str, path: str, body: dict | None = None) -> dict:
        context = f"{method} {self._endpoint}{path}"
        last_exc: Exception | None = None
        for attempt in range(self._max_retries + 1):
            if attempt:
                time.sleep(self._backoff_base * (2 ** (attempt - 1)))
            try:
                with self._slots:
                    response = self._client.request(method, path, json=body)
            except httpx.TimeoutException as exc:
                last_exc = BackendTimeoutError(str(exc), request=context)
                continue
            except httpx.TransportError as exc:
                last_exc = BackendConnectionError(str(exc), request=context)
                continue
            if 500 <= response.status_code < 600:
                last_exc = BackendRequestError(
                    f"server error {response.status_code}",
                    status=response.status_code, request=context)
                continue
            if response.status_code >= 400:
                try:
                    message = response.json().get("error", response.text)
                except json.JSONDecodeError:
                    message = response.text
                raise BackendRequestError(
                    str(message), status=response.status_code, request=context)
            try:
                payload = response.json()
            except json.JSONDecodeError as exc:
                raise MalformedResponseError(
                    f"response is not JSON: {exc}", request=context) from exc
            if not isinstance(payload, dict):
                raise MalformedResponseError(
                    f"expected JSON object, got {type(payload).__name__}",
                    request=context)
            return payload
        assert last_exc is not None
        raise last_exc

    def token_scores(self, text: str) -> List[TokenScore]:
        payload = self._request("POST", "/v1/token_scores", {"text": text})
        context = f"POST {self._endpoint}/v1/token_scores"
        try:
            tokens = payload["tokens"]
            log_probs = payload["log_probs"]
            attentions = payload["attentions"]
        except KeyError as exc:
            raise MalformedResponseError(f"missing field {exc}", request=context) from None
        if not (len(tokens) == len(log_probs) == len(attentions)):
            raise MalformedResponseError("unequal array lengths", request=context)
        try:
            return [
                TokenScore(t, float(lp), float(at))
                for t, lp, at in zip(tokens, log_probs, attentions)
            ]
        except (TypeError, ValueError) as exc:
            raise MalformedResponseError(str(exc), request=context) from exc

    def fill_mask(self, text: str, mask_index: int, top_k: int) -> List[MaskPrediction]:
        payload = self._request(
            "POST", "/v1/fill_mask",
            {"text": text, "mask_index": mask_index, "top_k": top_k})
        context = f"POST {self._endpoint}/v1/fill_mask"
        try:
            preds = [
                MaskPrediction(p["token"], float(p["prob"]))
                for p in payload["predictions"]
            ]
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedResponseError(str(exc), request=context) from exc
        for a, b in zip(preds, preds[1:]):
            if b.prob > a.prob:
                raise MalformedResponseError(
                    "predictions not sorted descending by prob", request=context)
        return preds

    def embed(self, text: str) -> EmbeddingVector:
        payload = self._request("POST", "/v1/embed", {"text": text})
        context = f"POST {self._endpoint}/v1/embed"
        try:
            return np.asarray(payload["vector"], dtype=np.float64)
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedResponseError(str(exc), request=context) from exc

    def info(self) -> BackendInfo:
        if self._info is None:
            payload = self._request("GET", "/v1/info")
            context = f"GET {self._endpoint}/v1/info"
            try:
                self._info = BackendInfo(
                    model_id=str(payload["model_id"]),
                    max_tokens=int(payload["max_tokens"]),
                    embedding_dim=int(payload["embedding_dim"]),
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise MalformedResponseError(str(exc), request=context) from exc
        return self._info

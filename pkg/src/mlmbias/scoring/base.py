"""Backend interface, attention-weighted sentence likelihood, cosine."""

from __future__ import annotations

import abc
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Sequence, Union

import numpy as np

from ..errors import EmbeddingError, MetricUndefinedError

#: Marker the pipeline substitutes for the pivot before a fill-mask call.
MASK_TOKEN = "[MASK]"

EmbeddingVector = np.ndarray


@dataclass(frozen=True)
class TokenScore:
    """Log-likelihood (natural log) and attention weight of one token."""

    token: str
    log_prob: float
    attention: float

    def __post_init__(self):
        if self.log_prob > 0.0:
            raise ValueError(f"log_prob must be <= 0, got {self.log_prob}")
        if self.attention < 0.0:
            raise ValueError(f"attention must be >= 0, got {self.attention}")


@dataclass(frozen=True)
class MaskPrediction:
    token: str
    prob: float

    def __post_init__(self):
        if not 0.0 <= self.prob <= 1.0:
            raise ValueError(f"prob must be in [0, 1], got {self.prob}")


@dataclass(frozen=True)
class BackendInfo:
    model_id: str
    max_tokens: int
    embedding_dim: int


@dataclass(frozen=True)
class ScoredSentence:
    """Per-token scores plus their attention-weighted mean log-likelihood."""

    text: str
    token_scores: tuple
    aula: float

    def recompute_aula(self) -> float:
        return _aula_value(self.token_scores)


class ScorerBackend(abc.ABC):
    """Model access contract.  Implementations must be deterministic for
    a fixed configuration and safe to call from multiple threads."""

    @abc.abstractmethod
    def token_scores(self, text: str) -> List[TokenScore]:
        """One score per token of the backend's own tokenization."""

    @abc.abstractmethod
    def fill_mask(self, text: str, mask_index: int, top_k: int) -> List[MaskPrediction]:
        """Top-k predictions for the masked slot, probabilities descending.
        `text` contains the MASK_TOKEN marker and `mask_index` is its
        whitespace-chunk index."""

    @abc.abstractmethod
    def embed(self, text: str) -> EmbeddingVector:
        """Fixed-dimension sentence embedding."""

    @abc.abstractmethod
    def info(self) -> BackendInfo:
        ...


def _aula_value(scores: Sequence[TokenScore]) -> float:
    # Compensated summation keeps the value independent of token order.
    return math.fsum(s.attention * s.log_prob for s in scores) / len(scores)


def compute_aula(backend: ScorerBackend, sentence: Union[str, "object"]) -> ScoredSentence:
    """Attention-weighted mean token log-likelihood of a sentence:
    (1/n) * sum_i attention_i * log_prob_i over the backend's tokens."""
    text = sentence if isinstance(sentence, str) else sentence.text
    scores = tuple(backend.token_scores(text))
    if not scores:
        raise MetricUndefinedError(f"backend returned no token scores for {text!r}")
    return ScoredSentence(text=text, token_scores=scores, aula=_aula_value(scores))


def cosine_similarity(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise EmbeddingError(f"dimension mismatch: {a.shape} vs {b.shape}")
    norm_a = float(np.linalg.norm(a))
    norm_b = float(np.linalg.norm(b))
    if norm_a == 0.0 or norm_b == 0.0:
        raise EmbeddingError("cosine similarity undefined for zero vector")
    return float(np.dot(a, b)) / (norm_a * norm_b)


def score_texts(backend: ScorerBackend, texts: Sequence[str], jobs: int = 1) -> List[ScoredSentence]:
    """Score many sentences, optionally with a bounded thread pool.
    Output order always equals input order."""
    if jobs <= 1 or len(texts) <= 1:
        return [compute_aula(backend, t) for t in texts]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(lambda t: compute_aula(backend, t), texts))

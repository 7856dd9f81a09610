"""Scorer backends: the model-access boundary of the pipeline.

Everything upstream treats a backend as three operations — per-token
likelihood+attention, mask filling, sentence embedding — so the metric
code runs identically against a JSON fixture (TableBackend), an HTTP
model server (RemoteBackend), or any other implementation.
"""

from .base import (
    BackendInfo,
    EmbeddingVector,
    MaskPrediction,
    ScoredSentence,
    ScorerBackend,
    TokenScore,
    compute_aula,
    cosine_similarity,
    score_texts,
)
from .cache import CachingBackend
from .remote import RemoteBackend
from .table import TableBackend

__all__ = [
    "BackendInfo",
    "CachingBackend",
    "EmbeddingVector",
    "MaskPrediction",
    "RemoteBackend",
    "ScoredSentence",
    "ScorerBackend",
    "TableBackend",
    "TokenScore",
    "compute_aula",
    "cosine_similarity",
    "score_texts",
]

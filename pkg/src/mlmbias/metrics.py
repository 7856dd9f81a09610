"""Bias metrics and run diagnostics.

Three scores, each the fraction of comparisons the male side wins
(strict inequality; ties count as zero):

* pairwise score over matched counterfactual pairs, comparing
  attention-weighted sentence likelihoods;
* cross-product score over all (male, female) sentence combinations,
  each comparison weighted by embedding cosine similarity;
* direct word score over mask-filled pairs, comparing the model's
  probabilities for the predicted male and female words.

Summation in the cross-product score runs through mlmbias.kernels, so
its cost is one pass over the pair grid with compensated accumulation;
all scores are deterministic and order-independent within 1e-9.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from . import kernels
from .corpus import GenderedPartition, SentenceRecord
from .errors import EmbeddingError, MetricUndefinedError
from .lexicon import Gender, casefold
from .pairgen import GenerationStats, Origin, SentencePair
from .scoring.base import ScorerBackend, compute_aula


@dataclass(frozen=True)
class BiasScore:
    metric: str
    value: float  # fraction; reports render it in percent
    n_comparisons: int
    per_fold: Optional[Tuple[float, ...]] = None
    stddev: Optional[float] = None

    def __post_init__(self):
        folds = 0 if self.per_fold is None else len(self.per_fold)
        if (self.stddev is not None) != (folds >= 2):
            raise ValueError("stddev must be present exactly when >= 2 folds exist")

    @property
    def pct(self) -> float:
        return 100.0 * self.value

    @classmethod
    def from_folds(cls, metric: str, fold_values: Sequence[float],
                   n_comparisons: int) -> "BiasScore":
        mean, stddev = fold_stats(fold_values)
        return cls(metric=metric, value=mean, n_comparisons=n_comparisons,
                   per_fold=tuple(fold_values), stddev=stddev)

    def to_dict(self) -> dict:
        obj = {
            "metric": self.metric,
            "value": self.value,
            "pct": self.pct,
            "n_comparisons": self.n_comparisons,
        }
        if self.per_fold is not None:
            obj["per_fold"] = list(self.per_fold)
        if self.stddev is not None:
            obj["stddev"] = self.stddev
        return obj


@dataclass(frozen=True)
class DistributionReport:
    male_count: int
    female_count: int
    male_pct: float
    female_pct: float
    ratio: float  # male/female; inf when female_count == 0

    @classmethod
    def from_counts(cls, male_count: int, female_count: int) -> "DistributionReport":
        total = male_count + female_count
        if total == 0:
            raise MetricUndefinedError("gender distribution undefined: no gendered sentences")
        ratio = male_count / female_count if female_count else math.inf
        return cls(
            male_count=male_count,
            female_count=female_count,
            male_pct=100.0 * male_count / total,
            female_pct=100.0 * female_count / total,
            ratio=ratio,
        )

    def to_dict(self) -> dict:
        return {
            "male_count": self.male_count,
            "female_count": self.female_count,
            "male_pct": self.male_pct,
            "female_pct": self.female_pct,
            "ratio": self.ratio if math.isfinite(self.ratio) else "inf",
        }


@dataclass(frozen=True)
class DiagnosticsReport:
    word_types: Dict[str, Dict[str, int]]
    categories: Dict[str, float]
    balance: Dict[str, float]

    def to_dict(self) -> dict:
        return {
            "word_types": self.word_types,
            "categories": self.categories,
            "balance": self.balance,
        }


Sentences = Sequence[Union[str, SentenceRecord]]


def _texts(sentences: Sentences) -> List[str]:
    return [s if isinstance(s, str) else s.text for s in sentences]


def _aula_cache(backend: ScorerBackend) -> "callable":
    cache: Dict[str, float] = {}

    def aula(text: str) -> float:
        if text not in cache:
            cache[text] = compute_aula(backend, text).aula
        return cache[text]

    return aula


def compute_sbm(pairs: Sequence[SentencePair], backend: ScorerBackend) -> BiasScore:
    """Fraction of matched pairs whose male sentence scores strictly
    higher.  Each distinct sentence is scored once."""
    if not pairs:
        raise MetricUndefinedError("pairwise score undefined on empty pair list")
    aula = _aula_cache(backend)
    preferred = sum(1 for p in pairs if aula(p.male.text) > aula(p.female.text))
    return BiasScore(metric="SBM", value=preferred / len(pairs), n_comparisons=len(pairs))


def compute_mbe(t_m: Sentences, t_f: Sentences, backend: ScorerBackend) -> BiasScore:
    """Similarity-weighted preference fraction over the full male x
    female cross product.  Likelihood scores and embeddings are computed
    once per sentence and reused across the grid."""
    male_texts = _texts(t_m)
    female_texts = _texts(t_f)
    if not male_texts or not female_texts:
        raise MetricUndefinedError("cross-product score undefined: a gender set is empty")
    aula_m = np.array([compute_aula(backend, t).aula for t in male_texts])
    aula_f = np.array([compute_aula(backend, t).aula for t in female_texts])
    emb_m = np.stack([np.asarray(backend.embed(t), dtype=np.float64) for t in male_texts])
    emb_f = np.stack([np.asarray(backend.embed(t), dtype=np.float64) for t in female_texts])
    if emb_m.shape[1] != emb_f.shape[1]:
        raise EmbeddingError(
            f"embedding dimensions differ: {emb_m.shape[1]} vs {emb_f.shape[1]}")
    for label, emb, texts in (("male", emb_m, male_texts), ("female", emb_f, female_texts)):
        norms = np.linalg.norm(emb, axis=1)
        zero = np.flatnonzero(norms == 0.0)
        if zero.size:
            raise EmbeddingError(
                f"zero embedding for {label} sentence {texts[zero[0]]!r}")
        emb /= norms[:, None]
    num, den = kernels.mbe_accumulate(emb_m, emb_f, aula_m, aula_f)
    if den == 0.0:
        raise MetricUndefinedError("cross-product score undefined: all similarity weights are zero")
    return BiasScore(metric="MBE", value=num / den,
                     n_comparisons=len(male_texts) * len(female_texts))


def compute_dbm(pairs: Sequence[SentencePair], threshold: float) -> BiasScore:
    """Fraction of pairs whose predicted male word outscores the female
    word.  Pairs where neither prediction reaches the threshold are
    excluded; a missing prediction counts as probability zero."""
    retained = [
        p for p in pairs
        if max(p.male_prob or 0.0, p.female_prob or 0.0) >= threshold
    ]
    if not retained:
        raise MetricUndefinedError(
            "direct comparison undefined: no pair has a prediction at the threshold")
    preferred = sum(
        1 for p in retained if (p.male_prob or 0.0) > (p.female_prob or 0.0))
    return BiasScore(metric="DBM", value=preferred / len(retained),
                     n_comparisons=len(retained))


def fold_stats(scores: Sequence[float]) -> Tuple[float, Optional[float]]:
    """Mean and population standard deviation (divisor n); the deviation
    is absent for a single fold."""
    if not scores:
        raise MetricUndefinedError("fold statistics undefined on empty list")
    n = len(scores)
    mean = math.fsum(scores) / n
    if n == 1:
        return mean, None
    variance = math.fsum((s - mean) ** 2 for s in scores) / n
    return mean, math.sqrt(variance)


def gender_distribution(partition: GenderedPartition) -> DistributionReport:
    return DistributionReport.from_counts(
        len(partition.male_only), len(partition.female_only))


def diagnostics(stats: GenerationStats, pairs: Sequence[SentencePair]) -> DiagnosticsReport:
    """Unique gender-word type counts split by origin, category
    proportions and balancing losses."""
    lexicon_types = {Gender.MALE: set(), Gender.FEMALE: set()}
    both_types = {Gender.MALE: set(), Gender.FEMALE: set()}
    one_types = {Gender.MALE: set(), Gender.FEMALE: set()}
    for pair in pairs:
        if pair.origin is Origin.LEXICON:
            lexicon_types[Gender.MALE].add(casefold(pair.male_word))
            lexicon_types[Gender.FEMALE].add(casefold(pair.female_word))
        elif pair.origin is Origin.MODEL_BOTH:
            both_types[Gender.MALE].add(casefold(pair.male_word))
            both_types[Gender.FEMALE].add(casefold(pair.female_word))
        elif pair.origin is Origin.MODEL_ONE_PLUS_LEXICON:
            if pair.predicted_gender is Gender.MALE:
                one_types[Gender.MALE].add(casefold(pair.male_word))
            else:
                one_types[Gender.FEMALE].add(casefold(pair.female_word))
    word_types = {
        "lexicon": {g.value: len(lexicon_types[g]) for g in Gender},
        "model_both": {g.value: len(both_types[g]) for g in Gender},
        "model_one": {g.value: len(one_types[g]) for g in Gender},
        "model_total": {g.value: len(both_types[g] | one_types[g]) for g in Gender},
    }
    total = stats.input_single_gender
    categories = {
        "both": stats.both,
        "one_gender": stats.one_gender,
        "none": stats.none,
        "both_pct": 100.0 * stats.both / total if total else 0.0,
        "one_gender_pct": 100.0 * stats.one_gender / total if total else 0.0,
        "none_pct": 100.0 * stats.none / total if total else 0.0,
    }
    balance = {
        "discarded": stats.discarded_for_balance,
        "discard_pct": stats.discard_pct,
        "retained": stats.retained,
    }
    return DiagnosticsReport(word_types=word_types, categories=categories, balance=balance)

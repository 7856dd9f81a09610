"""Counterfactual sentence pair generation.

Two routes produce matched male/female sentence pairs from sentences
holding exactly one gender word:

* lexicon substitution: swap the gender word for its lexicon
  counterpart (plus any agreement-mapped dependents in range);
* mask filling: mask the gender word, ask the scorer for its most
  probable male and female completions above a confidence threshold,
  and fall back to the lexicon for a missing gender.  Sentences where
  neither gender clears the threshold are discarded and counted.

Balancing truncates the larger gender group to the smaller one with a
seeded shuffle, so every randomized output is a pure function of
(input, seed).
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from .corpus import GenderedPartition, SentenceRecord
from .errors import BackendError, MetricUndefinedError, PairGenError
from .lexicon import (
    Gender,
    GenderLexicon,
    Match,
    MatchMode,
    casefold,
    replicate_casing,
)
from .rng import SplitMix64, derive_seed
from .scoring.base import MASK_TOKEN, ScorerBackend
from .tokenization import rebuild, whitespace_chunk_index


class Origin(enum.Enum):
    LEXICON = "lexicon"
    MODEL_BOTH = "model_both"
    MODEL_ONE_PLUS_LEXICON = "model_one_plus_lexicon"


@dataclass(frozen=True)
class SentencePair:
    """Matched counterfactual sentences differing at the pivot word.

    `pivot` is the gender word's position in the source sentence (token
    index in token mode, character offset in substring mode).
    `source_gender` is the gender of the original corpus sentence;
    `predicted_gender`, set only for one-gender model pairs, records
    which side came from the model.
    """

    id: int
    male: SentenceRecord
    female: SentenceRecord
    pivot: int
    origin: Origin
    male_word: str
    female_word: str
    source_gender: Gender
    male_prob: Optional[float] = None
    female_prob: Optional[float] = None
    predicted_gender: Optional[Gender] = None

    def to_dict(self) -> dict:
        obj = {
            "id": self.id,
            "male_text": self.male.text,
            "female_text": self.female.text,
            "pivot": self.pivot,
            "origin": self.origin.value,
            "male_word": self.male_word,
            "female_word": self.female_word,
            "source_gender": self.source_gender.value,
        }
        if self.male_prob is not None:
            obj["male_prob"] = self.male_prob
        if self.female_prob is not None:
            obj["female_prob"] = self.female_prob
        if self.predicted_gender is not None:
            obj["predicted_gender"] = self.predicted_gender.value
        return obj

    @classmethod
    def from_dict(cls, obj: dict, language: str = "und") -> "SentencePair":
        return cls(
            id=int(obj["id"]),
            male=SentenceRecord.from_text(int(obj["id"]), obj["male_text"], language),
            female=SentenceRecord.from_text(int(obj["id"]), obj["female_text"], language),
            pivot=int(obj["pivot"]),
            origin=Origin(obj["origin"]),
            male_word=obj["male_word"],
            female_word=obj["female_word"],
            source_gender=Gender(obj["source_gender"]),
            male_prob=obj.get("male_prob"),
            female_prob=obj.get("female_prob"),
            predicted_gender=(
                Gender(obj["predicted_gender"]) if "predicted_gender" in obj else None),
        )


@dataclass(frozen=True)
class MsgConfig:
    threshold: float = 0.01
    top_k: int = 10
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.threshold < 1.0:
            raise ValueError(f"threshold must be in (0, 1), got {self.threshold}")
        if self.top_k < 1:
            raise ValueError(f"top_k must be >= 1, got {self.top_k}")


@dataclass
class GenerationStats:
    """Bookkeeping for one generation run.  both/one_gender/none are the
    mask-filling outcome categories and always sum to the number of
    single-gender input sentences for that method."""

    method: str
    input_single_gender: int
    both: int = 0
    one_gender: int = 0
    none: int = 0
    discarded_for_balance: int = 0
    retained: int = 0
    unique_male_words: int = 0
    unique_female_words: int = 0

    @property
    def discard_pct(self) -> float:
        if self.input_single_gender == 0:
            return 0.0
        return 100.0 * self.discarded_for_balance / self.input_single_gender

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "input_single_gender": self.input_single_gender,
            "both": self.both,
            "one_gender": self.one_gender,
            "none": self.none,
            "discarded_for_balance": self.discarded_for_balance,
            "discard_pct": self.discard_pct,
            "retained": self.retained,
            "unique_male_words": self.unique_male_words,
            "unique_female_words": self.unique_female_words,
        }


def _single_gender_records(partition: GenderedPartition) -> List[SentenceRecord]:
    return sorted(partition.male_only + partition.female_only, key=lambda r: r.id)


def _pivot_match(record: SentenceRecord) -> Match:
    if len(record.matches) != 1:
        raise PairGenError(
            f"sentence {record.id} has {len(record.matches)} gender matches, expected 1")
    return record.matches[0]


def apply_agreement(record: SentenceRecord, pivot: int, new_word: str,
                    target_gender: Gender, lexicon: GenderLexicon) -> SentenceRecord:
    """Substitute the pivot word and rewrite agreement-rule dependents.

    A dependent is rewritten when it sits within the rule's token window
    of the pivot and currently carries the opposite-gender form.  Casing
    of every rewritten token follows the token it replaces.  In
    substring mode only the pivot span is replaced; agreement windows
    are token distances and do not apply to unsegmented text.
    """
    source_gender = target_gender.opposite
    if lexicon.match_mode is MatchMode.SUBSTRING:
        match = next((m for m in record.matches if m.position == pivot), None)
        if match is None:
            raise PairGenError(f"sentence {record.id}: no match at offset {pivot}")
        text = record.text[:pivot] + new_word + record.text[pivot + len(match.word):]
        return SentenceRecord.from_text(record.id, text, record.language)

    if not 0 <= pivot < len(record.tokens):
        raise PairGenError(f"sentence {record.id}: pivot {pivot} out of range")
    replacements = {pivot: replicate_casing(record.tokens[pivot].text, new_word)}
    for i, tok in enumerate(record.tokens):
        if i == pivot:
            continue
        distance = abs(i - pivot)
        for rule in lexicon.agreement_rules:
            if distance <= rule.window and casefold(tok.text) == casefold(rule.form(source_gender)):
                replacements[i] = replicate_casing(tok.text, rule.form(target_gender))
                break
    new_text = rebuild(record.text, record.tokens, replacements)
    new_record = SentenceRecord.from_text(record.id, new_text, record.language)
    if len(new_record.tokens) != len(record.tokens):
        raise PairGenError(
            f"sentence {record.id}: substitution changed token count "
            f"({len(record.tokens)} -> {len(new_record.tokens)})")
    return new_record


def mask_pivot(record: SentenceRecord, match: Match, match_mode: MatchMode) -> Tuple[str, int]:
    """Replace the pivot with the mask marker; return the masked text and
    the marker's whitespace-chunk index (the wire convention)."""
    if match_mode is MatchMode.SUBSTRING:
        start = match.position
        masked = record.text[:start] + MASK_TOKEN + record.text[start + len(match.word):]
    else:
        start = record.tokens[match.position].start
        masked = rebuild(record.text, record.tokens, {match.position: MASK_TOKEN})
    return masked, whitespace_chunk_index(masked, start)


def _surface(template: str, word: str) -> str:
    return replicate_casing(template, word)


def _assemble(record: SentenceRecord, match: Match, lexicon: GenderLexicon,
              male_word: str, female_word: str, origin: Origin,
              male_prob: Optional[float], female_prob: Optional[float],
              predicted_gender: Optional[Gender]) -> SentencePair:
    male = apply_agreement(record, match.position, male_word, Gender.MALE, lexicon)
    female = apply_agreement(record, match.position, female_word, Gender.FEMALE, lexicon)
    return SentencePair(
        id=record.id,
        male=male,
        female=female,
        pivot=match.position,
        origin=origin,
        male_word=_surface(match.word, male_word),
        female_word=_surface(match.word, female_word),
        source_gender=match.gender,
        male_prob=male_prob,
        female_prob=female_prob,
        predicted_gender=predicted_gender,
    )


def _count_unique(stats: GenerationStats, pairs: Sequence[SentencePair]) -> None:
    stats.unique_male_words = len({casefold(p.male_word) for p in pairs})
    stats.unique_female_words = len({casefold(p.female_word) for p in pairs})


def generate_lsg(partition: GenderedPartition,
                 lexicon: GenderLexicon) -> Tuple[List[SentencePair], GenerationStats]:
    """One pair per single-gender sentence, counterpart side built by
    lexicon substitution.  Multi-gender and neutral sentences produce
    nothing."""
    records = _single_gender_records(partition)
    stats = GenerationStats(method="lsg", input_single_gender=len(records))
    pairs = []
    for record in records:
        match = _pivot_match(record)
        counter_word = lexicon.counterpart(match.word)
        if counter_word is None:
            raise PairGenError(
                f"sentence {record.id}: no counterpart for {match.word!r}")
        if match.gender is Gender.MALE:
            male_word, female_word = match.word, counter_word
        else:
            male_word, female_word = counter_word, match.word
        pairs.append(_assemble(
            record, match, lexicon, male_word, female_word,
            Origin.LEXICON, None, None, None))
    _count_unique(stats, pairs)
    return pairs, stats


def generate_msg(partition: GenderedPartition, lexicon: GenderLexicon,
                 backend: ScorerBackend,
                 config: MsgConfig) -> Tuple[List[SentencePair], GenerationStats]:
    """Mask each pivot and build the pair from the scorer's best male and
    female completions at or above the threshold.  With exactly one
    gender predicted, the missing side falls back to the lexicon: the
    original corpus word when it has the missing gender, otherwise its
    counterpart.  With neither, the sentence is discarded."""
    records = _single_gender_records(partition)
    stats = GenerationStats(method="msg", input_single_gender=len(records))
    pairs = []
    for record in records:
        match = _pivot_match(record)
        masked, mask_index = mask_pivot(record, match, lexicon.match_mode)
        try:
            predictions = backend.fill_mask(masked, mask_index, config.top_k)
        except BackendError as exc:
            raise type(exc)(f"sentence {record.id}: {exc}") from exc
        best: Dict[Gender, Optional[object]] = {Gender.MALE: None, Gender.FEMALE: None}
        for pred in predictions:  # descending by prob: first hit per gender wins
            if pred.prob < config.threshold:
                continue
            gender = lexicon.gender_of(pred.token)
            if gender is not None and best[gender] is None:
                best[gender] = pred
        male_pred = best[Gender.MALE]
        female_pred = best[Gender.FEMALE]

        if male_pred is not None and female_pred is not None:
            stats.both += 1
            pairs.append(_assemble(
                record, match, lexicon, male_pred.token, female_pred.token,
                Origin.MODEL_BOTH, male_pred.prob, female_pred.prob, None))
        elif male_pred is not None or female_pred is not None:
            stats.one_gender += 1
            predicted = Gender.MALE if male_pred is not None else Gender.FEMALE
            pred = male_pred if male_pred is not None else female_pred
            missing = predicted.opposite
            if missing is match.gender:
                fallback_word = match.word
            else:
                fallback_word = lexicon.counterpart(match.word)
                if fallback_word is None:
                    raise PairGenError(
                        f"sentence {record.id}: no counterpart for {match.word!r}")
            if predicted is Gender.MALE:
                male_word, female_word = pred.token, fallback_word
                male_prob, female_prob = pred.prob, None
            else:
                male_word, female_word = fallback_word, pred.token
                male_prob, female_prob = None, pred.prob
            pairs.append(_assemble(
                record, match, lexicon, male_word, female_word,
                Origin.MODEL_ONE_PLUS_LEXICON, male_prob, female_prob, predicted))
        else:
            stats.none += 1
    _count_unique(stats, pairs)
    return pairs, stats


def _truncate(pairs: Sequence[SentencePair], size: int, seed: int) -> List[SentencePair]:
    pool = list(pairs)
    SplitMix64(seed).shuffle(pool)
    return sorted(pool[:size], key=lambda p: p.id)


def balance_lsg(pairs: Sequence[SentencePair], stats: GenerationStats,
                folds: int = 5, seed: int = 0) -> Tuple[List[List[SentencePair]], GenerationStats]:
    """Per fold, truncate the larger source-gender group to the smaller
    one.  The smaller group is reused untouched in every fold; the
    truncation seed is derived per fold, so folds differ only in which
    larger-group sentences they keep."""
    if folds < 1:
        raise ValueError("folds must be >= 1")
    male_src = [p for p in pairs if p.source_gender is Gender.MALE]
    female_src = [p for p in pairs if p.source_gender is Gender.FEMALE]
    if not male_src or not female_src:
        raise MetricUndefinedError(
            "cannot balance: one source-gender set is empty "
            f"(male={len(male_src)}, female={len(female_src)})")
    target = min(len(male_src), len(female_src))
    fold_sets = []
    for fold in range(folds):
        fold_seed = derive_seed(seed, fold)
        kept_male = male_src if len(male_src) == target else _truncate(male_src, target, fold_seed)
        kept_female = female_src if len(female_src) == target else _truncate(female_src, target, fold_seed)
        fold_sets.append(sorted(kept_male + kept_female, key=lambda p: p.id))
    stats = replace_stats(stats,
                          retained=2 * target,
                          discarded_for_balance=len(pairs) - 2 * target)
    return fold_sets, stats


def balance_msg(pairs: Sequence[SentencePair], stats: GenerationStats,
                seed: int = 0) -> Tuple[List[SentencePair], GenerationStats]:
    """Keep all both-gender pairs; truncate the larger one-gender group
    (split by which gender the model predicted) to the smaller one.
    No-prediction sentences were already dropped during generation and
    count toward the discard total."""
    both = [p for p in pairs if p.origin is Origin.MODEL_BOTH]
    one_male = [p for p in pairs
                if p.origin is Origin.MODEL_ONE_PLUS_LEXICON
                and p.predicted_gender is Gender.MALE]
    one_female = [p for p in pairs
                  if p.origin is Origin.MODEL_ONE_PLUS_LEXICON
                  and p.predicted_gender is Gender.FEMALE]
    target = min(len(one_male), len(one_female))
    if len(one_male) > target:
        one_male = _truncate(one_male, target, derive_seed(seed, 0))
    if len(one_female) > target:
        one_female = _truncate(one_female, target, derive_seed(seed, 1))
    retained = sorted(both + one_male + one_female, key=lambda p: p.id)
    truncated = stats.one_gender - 2 * target
    stats = replace_stats(stats,
                          retained=len(retained),
                          discarded_for_balance=stats.none + truncated)
    return retained, stats


def replace_stats(stats: GenerationStats, **changes) -> GenerationStats:
    return replace(stats, **changes)


def balance_sentence_sets(male: Sequence[SentenceRecord], female: Sequence[SentenceRecord],
                          folds: int = 5, seed: int = 0
                          ) -> List[Tuple[List[SentenceRecord], List[SentenceRecord]]]:
    """Fold balancing for raw sentence sets (same scheme as balance_lsg):
    the larger set is truncated per fold, the smaller reused unchanged."""
    if folds < 1:
        raise ValueError("folds must be >= 1")
    if not male or not female:
        raise MetricUndefinedError(
            f"cannot balance: a gender set is empty (male={len(male)}, female={len(female)})")
    target = min(len(male), len(female))

    def truncate(records, fold_seed):
        pool = list(records)
        SplitMix64(fold_seed).shuffle(pool)
        return sorted(pool[:target], key=lambda r: r.id)

    fold_sets = []
    for fold in range(folds):
        fold_seed = derive_seed(seed, fold)
        kept_male = list(male) if len(male) == target else truncate(male, fold_seed)
        kept_female = list(female) if len(female) == target else truncate(female, fold_seed)
        fold_sets.append((kept_male, kept_female))
    return fold_sets


def analyze_topk_coverage(partition: GenderedPartition, lexicon: GenderLexicon,
                          backend: ScorerBackend, threshold: float,
                          k_max: int = 15) -> List[Tuple[int, float]]:
    """For k = 1..k_max, the fraction of at-or-above-threshold gendered
    predictions (within the top k_max) already covered by the top k.
    Non-decreasing in k and exactly 1.0 at k_max."""
    records = _single_gender_records(partition)
    if not records:
        raise MetricUndefinedError("top-k coverage undefined: no single-gender sentences")
    total = 0
    covered = [0] * (k_max + 1)
    for record in records:
        match = _pivot_match(record)
        masked, mask_index = mask_pivot(record, match, lexicon.match_mode)
        predictions = backend.fill_mask(masked, mask_index, k_max)
        ranks = [
            rank for rank, pred in enumerate(predictions, start=1)
            if pred.prob >= threshold and lexicon.gender_of(pred.token) is not None
        ]
        total += len(ranks)
        for rank in ranks:
            for k in range(rank, k_max + 1):
                covered[k] += 1
    if total == 0:
        raise MetricUndefinedError(
            "top-k coverage undefined: no gendered prediction reaches the threshold")
    return [(k, covered[k] / total) for k in range(1, k_max + 1)]


def write_pairs(pairs: Sequence[SentencePair], path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for pair in pairs:
            fh.write(json.dumps(pair.to_dict(), ensure_ascii=False) + "\n")


def read_pairs(path, language: str = "und") -> List[SentencePair]:
    pairs = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                pairs.append(SentencePair.from_dict(json.loads(line), language))
    return pairs

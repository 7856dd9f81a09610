"""Corpus ingestion, gender partitioning and lexicon coverage checks.

Corpora are plain UTF-8 files, one sentence per line; parallel corpora
are two line-aligned files where an empty target line means the
translation is missing.  All randomness is seeded and recorded.
"""

from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import List, NamedTuple, Optional, Sequence, Tuple

from .errors import CorpusError, MetricUndefinedError
from .lexicon import Gender, GenderLexicon, Match, find_gender_words
from .rng import PRNG_NAME, SplitMix64, derive_seed
from .tokenization import Token, tokenize

DEFAULT_TOKEN_LIMIT = 512


@dataclass(frozen=True)
class SentenceRecord:
    """One corpus sentence with tokenization and gender-word matches."""

    id: int
    language: str
    text: str
    tokens: Tuple[Token, ...]
    matches: Tuple[Match, ...] = ()

    @classmethod
    def from_text(cls, id: int, text: str, language: str = "und") -> "SentenceRecord":
        text = unicodedata.normalize("NFC", text)
        return cls(id=id, language=language, text=text, tokens=tuple(tokenize(text)))

    def token_texts(self) -> List[str]:
        return [t.text for t in self.tokens]


class ParallelPair(NamedTuple):
    source: SentenceRecord
    target: Optional[SentenceRecord]  # None when the translation line is empty


@dataclass
class GenderedPartition:
    """Disjoint split of a corpus by gender-word content.  Sentences in
    male_only/female_only carry exactly one lexicon match (counting
    occurrences, not distinct words)."""

    male_only: List[SentenceRecord] = field(default_factory=list)
    female_only: List[SentenceRecord] = field(default_factory=list)
    multi: List[SentenceRecord] = field(default_factory=list)
    neutral: List[SentenceRecord] = field(default_factory=list)
    dropped_over_limit: int = 0

    @property
    def single_gender_count(self) -> int:
        return len(self.male_only) + len(self.female_only)

    def total(self) -> int:
        return (len(self.male_only) + len(self.female_only)
                + len(self.multi) + len(self.neutral))


@dataclass(frozen=True)
class CoverageReport:
    """Lexicon coverage over translations of gendered sentences."""

    sampled: int
    english_gendered: int
    translated: int
    translated_gendered: int
    coverage: float
    seed: int
    prng: str = PRNG_NAME

    def __post_init__(self):
        if not (self.translated_gendered <= self.translated
                <= self.english_gendered <= self.sampled):
            raise ValueError("coverage counts violate the chain inequality")
        if not 0.0 <= self.coverage <= 1.0:
            raise ValueError("coverage must lie in [0, 1]")

    @property
    def coverage_pct(self) -> float:
        return 100.0 * self.coverage

    def to_dict(self) -> dict:
        return {
            "sampled": self.sampled,
            "english_gendered": self.english_gendered,
            "translated": self.translated,
            "translated_gendered": self.translated_gendered,
            "coverage": self.coverage,
            "seed": self.seed,
            "prng": self.prng,
        }


def _read_lines(path: Path) -> List[str]:
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise CorpusError(f"cannot read {path}: {exc}") from exc
    lines = data.split(b"\n")
    if lines and lines[-1] == b"":
        lines.pop()
    decoded = []
    for lineno, raw in enumerate(lines):
        try:
            decoded.append(raw.decode("utf-8").rstrip("\r"))
        except UnicodeDecodeError as exc:
            raise CorpusError(f"{path}:{lineno}: invalid UTF-8: {exc}") from exc
    return decoded


def load_monolingual(path, language: str = "und") -> List[SentenceRecord]:
    """One record per non-empty line; ids are 0-based line numbers, so
    blank lines leave gaps rather than renumbering."""
    lines = _read_lines(Path(path))
    return [
        SentenceRecord.from_text(i, line, language)
        for i, line in enumerate(lines)
        if line.strip()
    ]


def load_parallel(path_src, path_tgt,
                  src_language: str = "en",
                  tgt_language: str = "und") -> List[ParallelPair]:
    """Line-aligned pair files.  An empty target line yields a pair with
    target=None (translation absent); a line-count mismatch is a hard
    error because alignment would be meaningless."""
    src_lines = _read_lines(Path(path_src))
    tgt_lines = _read_lines(Path(path_tgt))
    if len(src_lines) != len(tgt_lines):
        raise CorpusError(
            f"line count mismatch: {path_src} has {len(src_lines)} lines, "
            f"{path_tgt} has {len(tgt_lines)}")
    pairs = []
    for i, (src, tgt) in enumerate(zip(src_lines, tgt_lines)):
        if not src.strip():
            continue
        source = SentenceRecord.from_text(i, src, src_language)
        target = SentenceRecord.from_text(i, tgt, tgt_language) if tgt.strip() else None
        pairs.append(ParallelPair(source, target))
    return pairs


def annotate(records: Sequence[SentenceRecord], lexicon: GenderLexicon) -> List[SentenceRecord]:
    """Fill each record's matches from the lexicon."""
    return [replace(r, matches=tuple(find_gender_words(lexicon, r))) for r in records]


def partition_gendered(records: Sequence[SentenceRecord], lexicon: GenderLexicon,
                       token_limit: int = DEFAULT_TOKEN_LIMIT) -> GenderedPartition:
    """Partition by match count: exactly one male match, exactly one
    female match, two or more matches of any gender, or none.  Sentences
    longer than token_limit are dropped (not truncated: truncation could
    delete the pivot) and counted."""
    partition = GenderedPartition()
    for record in records:
        if len(record.tokens) > token_limit:
            partition.dropped_over_limit += 1
            continue
        matches = tuple(find_gender_words(lexicon, record))
        record = replace(record, matches=matches)
        if len(matches) == 0:
            partition.neutral.append(record)
        elif len(matches) > 1:
            partition.multi.append(record)
        elif matches[0].gender is Gender.MALE:
            partition.male_only.append(record)
        else:
            partition.female_only.append(record)
    return partition


def validate_coverage(pairs: Sequence[ParallelPair],
                      english_lexicon: GenderLexicon,
                      target_lexicon: GenderLexicon,
                      sample_size: int,
                      seed: int) -> CoverageReport:
    """Sample source sentences, keep the gendered ones, drop those
    without a translation, and measure how many surviving translations
    contain a target-lexicon gender word."""
    if sample_size > len(pairs):
        raise CorpusError(
            f"sample size {sample_size} exceeds corpus size {len(pairs)}")
    rng = SplitMix64(derive_seed(seed))
    sample = [pairs[i] for i in rng.sample_indices(len(pairs), sample_size)]
    gendered = [p for p in sample if find_gender_words(english_lexicon, p.source)]
    translated = [p for p in gendered if p.target is not None]
    if not translated:
        raise MetricUndefinedError(
            "coverage undefined: no gendered sentence has a translation")
    translated_gendered = sum(
        1 for p in translated if find_gender_words(target_lexicon, p.target))
    return CoverageReport(
        sampled=sample_size,
        english_gendered=len(gendered),
        translated=len(translated),
        translated_gendered=translated_gendered,
        coverage=translated_gendered / len(translated),
        seed=seed,
    )


def write_partition(partition: GenderedPartition, outdir) -> List[Path]:
    """Write each partition class as newline-delimited JSON records with
    id, text, gender and match position."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    groups = [
        ("male_only", partition.male_only, Gender.MALE.value),
        ("female_only", partition.female_only, Gender.FEMALE.value),
        ("multi", partition.multi, "multi"),
        ("neutral", partition.neutral, "neutral"),
    ]
    for name, records, gender in groups:
        path = outdir / f"{name}.jsonl"
        with path.open("w", encoding="utf-8") as fh:
            for record in records:
                obj = {
                    "id": record.id,
                    "text": record.text,
                    "gender": gender,
                    "match_position": record.matches[0].position if len(record.matches) == 1 else None,
                }
                fh.write(json.dumps(obj, ensure_ascii=False) + "\n")
        written.append(path)
    return written

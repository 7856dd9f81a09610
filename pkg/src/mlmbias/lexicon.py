"""Gender lexicons: paired male/female words plus agreement mappings.

A lexicon is immutable after load and safe to share across workers.
Lookups are case-insensitive under Unicode casefolding; substitution
replicates the casing pattern of the word being replaced (lower, Title,
ALL-CAPS; anything mixed falls back to the lexicon spelling).

Two match modes: `token` for whitespace-segmented languages and
`substring` for unsegmented scripts, where entries match as contiguous
character runs with longest-match precedence.
"""

from __future__ import annotations

import enum
import unicodedata
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

from .errors import LexiconInvariantError, LexiconParseError
from .tokenization import Token, tokenize


class Gender(enum.Enum):
    MALE = "male"
    FEMALE = "female"

    @property
    def opposite(self) -> "Gender":
        return Gender.FEMALE if self is Gender.MALE else Gender.MALE


class MatchMode(enum.Enum):
    TOKEN = "token"
    SUBSTRING = "substring"


class AgreementScope(enum.Enum):
    ARTICLE = "article"
    POSSESSIVE = "possessive"
    DEMONSTRATIVE = "demonstrative"
    ADJECTIVE_FORM = "adjective_form"
    OTHER = "other"


def _norm(word: str) -> str:
    return unicodedata.normalize("NFC", word)


def casefold(word: str) -> str:
    return _norm(word).casefold()


def replicate_casing(template: str, word: str) -> str:
    """Rewrite `word` in the casing pattern of `template`."""
    if template.islower():
        return word.lower()
    if len(template) > 1 and template.isupper():
        return word.upper()
    if template[:1].isupper() and (len(template) == 1 or template[1:].islower()):
        return word[:1].upper() + word[1:]
    return word


@dataclass(frozen=True)
class GenderPair:
    """One male/female word pair.  Single words only; multi-word
    expressions are rejected at construction."""

    male: str
    female: str

    def __post_init__(self):
        object.__setattr__(self, "male", _norm(self.male))
        object.__setattr__(self, "female", _norm(self.female))
        for word in (self.male, self.female):
            if not word:
                raise ValueError("gender pair contains an empty word")
            if any(ch.isspace() for ch in word):
                raise ValueError(f"multi-word entry not supported: {word!r}")
        if casefold(self.male) == casefold(self.female):
            raise ValueError(f"male and female words are identical: {self.male!r}")


@dataclass(frozen=True)
class AgreementRule:
    """A gendered dependent (article, possessive, ...) that must be
    rewritten together with the pivot when it sits within `window`
    tokens of it."""

    dependent_male: str
    dependent_female: str
    scope: AgreementScope = AgreementScope.OTHER
    window: int = 1

    def __post_init__(self):
        object.__setattr__(self, "dependent_male", _norm(self.dependent_male))
        object.__setattr__(self, "dependent_female", _norm(self.dependent_female))
        if not self.dependent_male or not self.dependent_female:
            raise ValueError("agreement rule contains an empty word")
        if casefold(self.dependent_male) == casefold(self.dependent_female):
            raise ValueError(f"agreement forms are identical: {self.dependent_male!r}")
        if self.window < 1:
            raise ValueError("agreement window must be >= 1")

    def form(self, gender: Gender) -> str:
        return self.dependent_male if gender is Gender.MALE else self.dependent_female


class Match(NamedTuple):
    """One gender-word occurrence.  `position` is a token index in token
    mode and a character offset in substring mode; `word` is the surface
    form as it appears in the sentence."""

    position: int
    word: str
    gender: Gender


@dataclass
class ValidationIssue:
    kind: str  # duplicate | cross_listing | asymmetry
    word: str
    detail: str


@dataclass
class ValidationReport:
    issues: List[ValidationIssue] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.issues

    def summary(self) -> str:
        if self.passed:
            return "lexicon valid"
        return "; ".join(f"{i.kind}: {i.word} ({i.detail})" for i in self.issues)


@dataclass
class GenderLexicon:
    """Ordered gender pairs for one language.

    Construction does not validate cross-entry invariants (so that
    `validate_lexicon` can report on bad data); `load_lexicon` rejects
    files that fail validation.
    """

    language: str
    entries: Tuple[GenderPair, ...]
    agreement_rules: Tuple[AgreementRule, ...] = ()
    match_mode: MatchMode = MatchMode.TOKEN

    def __post_init__(self):
        self.entries = tuple(self.entries)
        self.agreement_rules = tuple(self.agreement_rules)
        male_index: Dict[str, GenderPair] = {}
        female_index: Dict[str, GenderPair] = {}
        for pair in self.entries:
            male_index.setdefault(casefold(pair.male), pair)
            female_index.setdefault(casefold(pair.female), pair)
        self._male_index = male_index
        self._female_index = female_index

    def __len__(self) -> int:
        return len(self.entries)

    def gender_of(self, word: str) -> Optional[Gender]:
        cf = casefold(word)
        if cf in self._male_index:
            return Gender.MALE
        if cf in self._female_index:
            return Gender.FEMALE
        return None

    def counterpart(self, word: str) -> Optional[str]:
        """Opposite-gender word for `word`, casing pattern preserved;
        None when the word is not in the lexicon."""
        cf = casefold(word)
        if cf in self._male_index:
            return replicate_casing(word, self._male_index[cf].female)
        if cf in self._female_index:
            return replicate_casing(word, self._female_index[cf].male)
        return None

    def find_in_tokens(self, tokens: Sequence[Token]) -> List[Match]:
        matches = []
        for i, tok in enumerate(tokens):
            gender = self.gender_of(tok.text)
            if gender is not None:
                matches.append(Match(i, tok.text, gender))
        return matches

    def find_in_text(self, text: str) -> List[Match]:
        """Substring scan: longest match wins, ties broken by leftmost
        start, accepted spans never overlap."""
        text = _norm(text)
        candidates = []  # (start, end, surface, gender)
        text_cf = text.casefold()
        aligned = len(text_cf) == len(text)  # casefold kept offsets valid
        for gender, index in ((Gender.MALE, self._male_index), (Gender.FEMALE, self._female_index)):
            for word_cf in index:
                n = len(word_cf)
                if aligned:
                    pos = text_cf.find(word_cf)
                    while pos != -1:
                        candidates.append((pos, pos + n, text[pos:pos + n], gender))
                        pos = text_cf.find(word_cf, pos + 1)
                else:
                    for pos in range(len(text) - n + 1):
                        if text[pos:pos + n].casefold() == word_cf:
                            candidates.append((pos, pos + n, text[pos:pos + n], gender))
        candidates.sort(key=lambda c: (-(c[1] - c[0]), c[0]))
        taken: List[Tuple[int, int]] = []
        accepted = []
        for start, end, surface, gender in candidates:
            if any(start < t_end and t_start < end for t_start, t_end in taken):
                continue
            taken.append((start, end))
            accepted.append(Match(start, surface, gender))
        accepted.sort(key=lambda m: m.position)
        return accepted


def find_gender_words(lexicon: GenderLexicon, sentence) -> List[Match]:
    """All gender-word occurrences in a sentence record, with positions
    and gender labels.  Accepts anything with `.text` and `.tokens`."""
    if lexicon.match_mode is MatchMode.SUBSTRING:
        return lexicon.find_in_text(sentence.text)
    tokens = getattr(sentence, "tokens", None)
    if tokens is None:
        tokens = tokenize(sentence.text)
    return lexicon.find_in_tokens(tokens)


def validate_lexicon(lexicon: GenderLexicon) -> ValidationReport:
    """Report duplicate words, cross-gender overlaps and asymmetric
    pairs.  Passes iff the lexicon invariants all hold."""
    report = ValidationReport()
    male_seen: Dict[str, int] = {}
    female_seen: Dict[str, int] = {}
    for n, pair in enumerate(lexicon.entries):
        for word, seen, side in (
            (pair.male, male_seen, "male"),
            (pair.female, female_seen, "female"),
        ):
            cf = casefold(word)
            if cf in seen:
                report.issues.append(ValidationIssue(
                    "duplicate", word,
                    f"{side} word appears in entries {seen[cf]} and {n}"))
            else:
                seen[cf] = n
    for cf in sorted(set(male_seen) & set(female_seen)):
        report.issues.append(ValidationIssue(
            "cross_listing", cf,
            f"listed as male (entry {male_seen[cf]}) and female (entry {female_seen[cf]})"))
    # Pair symmetry, brute force through the public lookup.
    for pair in lexicon.entries:
        for word in (pair.male, pair.female):
            first = lexicon.counterpart(word)
            back = lexicon.counterpart(first) if first is not None else None
            if back is None or casefold(back) != casefold(word):
                report.issues.append(ValidationIssue(
                    "asymmetry", word,
                    f"counterpart chain {word!r} -> {first!r} -> {back!r}"))
    return report


def load_lexicon(path) -> GenderLexicon:
    """Parse a lexicon file and enforce all invariants.

    Format: optional `lang=` / `match=` headers, then one `male<TAB>female`
    pair per line; an `#agreement` line opens a second section of
    `dep_male<TAB>dep_female<TAB>scope<TAB>window` rules.  `#`-prefixed
    lines are comments.
    """
    path = Path(path)
    language = "und"
    mode = MatchMode.TOKEN
    entries: List[GenderPair] = []
    rules: List[AgreementRule] = []
    in_agreement = False
    try:
        raw_lines = path.read_text(encoding="utf-8").splitlines()
    except UnicodeDecodeError as exc:
        raise LexiconParseError(f"not valid UTF-8: {exc}", path=str(path)) from exc

    for lineno, raw in enumerate(raw_lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if line == "#agreement":
            in_agreement = True
            continue
        if line.startswith("#"):
            continue
        if not entries and not rules and not in_agreement and "=" in line and "\t" not in line:
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key == "lang":
                language = value
                continue
            if key == "match":
                try:
                    mode = MatchMode(value)
                except ValueError:
                    raise LexiconParseError(
                        f"unknown match mode {value!r}", path=str(path), line=lineno)
                continue
            raise LexiconParseError(f"unknown header {key!r}", path=str(path), line=lineno)
        fields = line.split("\t")
        try:
            if in_agreement:
                if len(fields) != 4:
                    raise ValueError(f"expected 4 tab-separated fields, got {len(fields)}")
                dep_m, dep_f, scope_s, window_s = fields
                rules.append(AgreementRule(
                    dep_m.strip(), dep_f.strip(),
                    AgreementScope(scope_s.strip()), int(window_s)))
            else:
                if len(fields) != 2:
                    raise ValueError(f"expected 2 tab-separated fields, got {len(fields)}")
                entries.append(GenderPair(fields[0].strip(), fields[1].strip()))
        except ValueError as exc:
            raise LexiconParseError(str(exc), path=str(path), line=lineno) from exc

    lexicon = GenderLexicon(language, tuple(entries), tuple(rules), mode)
    report = validate_lexicon(lexicon)
    if not report.passed:
        first = report.issues[0]
        raise LexiconInvariantError(
            f"{path}: invalid lexicon: {report.summary()}", word=first.word)
    if not entries:
        warnings.warn(f"lexicon {path} has no entries", stacklevel=2)
    return lexicon

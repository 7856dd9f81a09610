"""Deterministic whitespace + punctuation tokenizer.

Chosen over a model tokenizer so that corpus handling is auditable and
has no model dependency: split on Unicode whitespace, then detach
leading/trailing punctuation characters as separate tokens.  Tokens
carry character spans into the original text, so a sentence can be
reconstructed exactly with selected tokens rewritten.
"""

from __future__ import annotations

import re
import unicodedata
from typing import Dict, List, NamedTuple, Sequence

_CHUNK_RE = re.compile(r"\S+")


class Token(NamedTuple):
    text: str
    start: int
    end: int


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def tokenize(text: str) -> List[Token]:
    tokens: List[Token] = []
    for match in _CHUNK_RE.finditer(text):
        start, end = match.start(), match.end()
        # Peel leading punctuation characters.
        while start < end and _is_punct(text[start]):
            tokens.append(Token(text[start], start, start + 1))
            start += 1
        # Peel trailing punctuation, remembering it until the core is out.
        trailing: List[Token] = []
        while end > start and _is_punct(text[end - 1]):
            trailing.append(Token(text[end - 1], end - 1, end))
            end -= 1
        if start < end:
            tokens.append(Token(text[start:end], start, end))
        tokens.extend(reversed(trailing))
    return tokens


def rebuild(text: str, tokens: Sequence[Token], replacements: Dict[int, str]) -> str:
    """Reconstruct `text` with tokens[i] replaced per `replacements`.
    Inter-token gaps (whitespace) are preserved verbatim."""
    parts: List[str] = []
    cursor = 0
    for i, tok in enumerate(tokens):
        parts.append(text[cursor:tok.start])
        parts.append(replacements.get(i, tok.text))
        cursor = tok.end
    parts.append(text[cursor:])
    return "".join(parts)


def whitespace_chunk_index(text: str, pos: int) -> int:
    """Index of the whitespace-delimited chunk covering character `pos`.

    This is the wire convention for mask positions: both ends of the
    protocol can compute it from the text alone.
    """
    for i, match in enumerate(_CHUNK_RE.finditer(text)):
        if match.start() <= pos < match.end():
            return i
    raise ValueError(f"position {pos} not inside any chunk of {text!r}")

"""Offset arithmetic shared by the endpoints.

The wire convention for mask positions is the index of the
whitespace-delimited chunk holding the masked slot, computable from the
text alone by either protocol end.  Word aggregation groups word pieces
by the chunk their start offset falls in, except that pieces made of
CJK characters stay single (unsegmented scripts carry no whitespace, so
chunk grouping would collapse the whole sentence into one word).
"""

from __future__ import annotations

import re
from typing import List, Sequence, Tuple

_CHUNK_RE = re.compile(r"\S+")

_CJK_RANGES = (
    (0x3400, 0x4DBF),
    (0x4E00, 0x9FFF),
    (0xF900, 0xFAFF),
)


def chunk_spans(text: str) -> List[Tuple[int, int]]:
    return [(m.start(), m.end()) for m in _CHUNK_RE.finditer(text)]


def chunk_index(text: str, pos: int) -> int:
    for i, (start, end) in enumerate(chunk_spans(text)):
        if start <= pos < end:
            return i
    raise ValueError(f"position {pos} not inside any chunk")


def is_cjk(fragment: str) -> bool:
    return bool(fragment) and all(
        any(lo <= ord(ch) <= hi for lo, hi in _CJK_RANGES) for ch in fragment)


def group_pieces(text: str, offsets: Sequence[Tuple[int, int]],
                 keep: Sequence[bool]) -> List[List[int]]:
    """Group piece indices into word groups.

    `offsets` are (start, end) character offsets per piece; pieces with
    keep[i] False (special tokens) are skipped.  Pieces join the group
    of their whitespace chunk; a CJK piece always opens its own group.
    """
    spans = chunk_spans(text)
    groups: List[List[int]] = []
    current_chunk = -1
    for i, ((start, end), kept) in enumerate(zip(offsets, keep)):
        if not kept:
            continue
        chunk = None
        for c, (c_start, c_end) in enumerate(spans):
            if c_start <= start < c_end:
                chunk = c
                break
        if chunk is None:
            raise LookupError(f"piece {i} at offset {start}:{end} aligns with no chunk")
        if is_cjk(text[start:end]):
            groups.append([i])
            current_chunk = -1  # force the next piece to open a new group
        elif chunk == current_chunk and groups:
            groups[-1].append(i)
        else:
            groups.append([i])
            current_chunk = chunk
    return groups

"""Portable deterministic randomness.

All randomized operations (fold truncation, corpus sampling) go through
SplitMix64, the published 64-bit generator of Steele, Lea & Flood
(reused here because its output stream is fixed by the algorithm, not
by any library version).  Reports record PRNG_NAME so a run can be
reproduced bit-for-bit elsewhere.
"""

from __future__ import annotations

from typing import List, Sequence, TypeVar

T = TypeVar("T")

PRNG_NAME = "splitmix64"

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix(z: int) -> int:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & _MASK64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK64
    return z ^ (z >> 31)


class SplitMix64:
    """SplitMix64 stream with helpers for unbiased bounded draws."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        return _mix(self._state)

    def below(self, n: int) -> int:
        """Uniform integer in [0, n) by masked rejection sampling."""
        if n <= 0:
            raise ValueError("bound must be positive")
        mask = (1 << n.bit_length()) - 1
        while True:
            value = self.next_u64() & mask
            if value < n:
                return value

    def shuffle(self, items: List[T]) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]

    def sample_indices(self, n: int, k: int) -> List[int]:
        """k distinct indices from range(n), in ascending order."""
        if k > n:
            raise ValueError(f"cannot sample {k} from {n}")
        indices = list(range(n))
        # Partial Fisher-Yates: position i receives a uniform choice
        # from the not-yet-fixed tail.
        for i in range(k):
            j = i + self.below(n - i)
            indices[i], indices[j] = indices[j], indices[i]
        return sorted(indices[:k])

    def choose(self, items: Sequence[T], k: int) -> List[T]:
        return [items[i] for i in self.sample_indices(len(items), k)]


def derive_seed(seed: int, *indices: int) -> int:
    """Stable sub-stream seed: fold each index into the seed via the
    SplitMix64 finalizer.  derive_seed(s) == mix(s)."""
    z = _mix(seed & _MASK64)
    for index in indices:
        z = _mix((z + _GOLDEN * (index + 1)) & _MASK64)
    return z

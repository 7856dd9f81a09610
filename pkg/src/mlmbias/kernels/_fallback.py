"""Blocked numpy implementation of the pairwise accumulation kernel.

Blocks bound peak memory to block_rows * n_f floats instead of
materializing the full similarity matrix; per-block sums are combined
with math.fsum so the result does not drift with block size.
"""

from __future__ import annotations

import math
from typing import Tuple

import numpy as np

_BLOCK_ROWS = 256


def mbe_accumulate(emb_m: np.ndarray, emb_f: np.ndarray,
                   aula_m: np.ndarray, aula_f: np.ndarray,
                   block_rows: int = _BLOCK_ROWS) -> Tuple[float, float]:
    num_parts = []
    den_parts = []
    emb_f_t = emb_f.T
    for start in range(0, emb_m.shape[0], block_rows):
        stop = start + block_rows
        weights = emb_m[start:stop] @ emb_f_t
        preferred = aula_m[start:stop, None] > aula_f[None, :]
        num_parts.append(float(np.sum(weights, where=preferred)))
        den_parts.append(float(np.sum(weights)))
    return math.fsum(num_parts), math.fsum(den_parts)

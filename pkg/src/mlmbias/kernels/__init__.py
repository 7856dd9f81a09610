"""Hot inner loop of the cross-product bias metric.

The similarity-weighted preference sum is O(n_male * n_female * dim) and
dominates primary-pipeline runtime on large corpora, so it lives behind
a small kernel contract: a Cython implementation (streaming, O(1) extra
memory) with a blocked numpy fallback selected at import time.  Set
MLMBIAS_PURE_PYTHON=1 to force the fallback.  Both implementations use
compensated accumulation and agree within 1e-9; see
benchmarks/bench_kernels.py for the speed comparison.
"""

from __future__ import annotations

import os
from typing import Tuple

import numpy as np

from . import _fallback

try:
    from . import _native  # compiled at install time; optional
except ImportError:
    _native = None

HAVE_NATIVE = _native is not None
_FORCE_PURE = os.environ.get("MLMBIAS_PURE_PYTHON", "") not in ("", "0")


def active_impl() -> str:
    return "native" if (HAVE_NATIVE and not _FORCE_PURE) else "numpy"


def mbe_accumulate(emb_m: np.ndarray, emb_f: np.ndarray,
                   aula_m: np.ndarray, aula_f: np.ndarray) -> Tuple[float, float]:
    """Return (preferred_weight_sum, total_weight_sum) over all
    (male, female) sentence pairs.

    Embedding rows must be unit-normalized float64 so the pairwise
    weight is a plain dot product; a pair counts toward the numerator
    when the male sentence scores strictly higher.
    """
    emb_m = np.ascontiguousarray(emb_m, dtype=np.float64)
    emb_f = np.ascontiguousarray(emb_f, dtype=np.float64)
    aula_m = np.ascontiguousarray(aula_m, dtype=np.float64)
    aula_f = np.ascontiguousarray(aula_f, dtype=np.float64)
    if emb_m.ndim != 2 or emb_f.ndim != 2 or emb_m.shape[1] != emb_f.shape[1]:
        raise ValueError(f"embedding shape mismatch: {emb_m.shape} vs {emb_f.shape}")
    if emb_m.shape[0] != aula_m.shape[0] or emb_f.shape[0] != aula_f.shape[0]:
        raise ValueError("embedding/score length mismatch")
    if active_impl() == "native":
        return _native.mbe_accumulate(emb_m, emb_f, aula_m, aula_f)
    return _fallback.mbe_accumulate(emb_m, emb_f, aula_m, aula_f)

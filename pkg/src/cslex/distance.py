"""Phone-level Levenshtein distance.

Phone sequences are interned to one code point per symbol so rapidfuzz can
run its C implementation over them.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
from rapidfuzz.distance import Levenshtein
from rapidfuzz.process import cdist

_CODES: dict[str, str] = {}


def encode(pron: Sequence[str]) -> str:
    out = []
    for ph in pron:
        ch = _CODES.get(ph)
        if ch is None:
            ch = _CODES[ph] = chr(0x4E00 + len(_CODES))
        out.append(ch)
    return "".join(out)


def edit_distance(a: Sequence[str], b: Sequence[str]) -> int:
    return Levenshtein.distance(encode(a), encode(b))


def distance_matrix(rows: Sequence[Sequence[str]], cols: Sequence[Sequence[str]]) -> np.ndarray:
    """Integer matrix of edit distances, ``rows x cols``."""
    if not rows or not cols:
        return np.zeros((len(rows), len(cols)), dtype=np.int64)
    return cdist([encode(r) for r in rows], [encode(c) for c in cols],
                 scorer=Levenshtein.distance, dtype=np.int64)

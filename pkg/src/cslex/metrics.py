"""Mixed error rate scoring for code-switched transcripts, and ARR.

Native (CJK) text is scored per character and foreign text per word, in one
alignment stream.  The per-language rates are recall based: one minus the
fraction of that language's reference tokens aligned as correct, so
insertions only ever count against MER.
"""

from __future__ import annotations

import enum
import json
import math
import re
from dataclasses import asdict, dataclass, field
from typing import Iterable, Mapping, Sequence

from cslex.errors import EmptyReference, InvalidCounts, MixedScriptToken

_CJK = "㐀-䶿一-鿿豈-﫿"
_TOKEN_RE = re.compile(rf"[{_CJK}]|[^\W{_CJK}]+")


class TokenLang(str, enum.Enum):
    NATIVE_CHAR = "native_char"
    FOREIGN_WORD = "foreign_word"


@dataclass(frozen=True)
class MixedToken:
    surface: str
    language: TokenLang

    def __str__(self):
        return self.surface


def tokenize_mixed(line: str) -> list[MixedToken]:
    """Split a line into CJK characters and ASCII-letter words.

    Whitespace and punctuation are dropped.  A run of word characters that is
    not pure ASCII letters (``"mp3"``, ``"café"``) raises MixedScriptToken.
    """
    out = []
    for m in _TOKEN_RE.finditer(line):
        tok = m.group(0)
        if len(tok) == 1 and re.match(rf"[{_CJK}]", tok):
            out.append(MixedToken(tok, TokenLang.NATIVE_CHAR))
        elif tok.isascii() and tok.isalpha():
            out.append(MixedToken(tok, TokenLang.FOREIGN_WORD))
        else:
            raise MixedScriptToken(tok)
    return out


class Op(str, enum.Enum):
    C = "C"
    S = "S"
    I = "I"  # noqa: E741
    D = "D"


@dataclass(frozen=True)
class AlignmentOp:
    kind: Op
    ref_token: MixedToken | None = None
    hyp_token: MixedToken | None = None


def align(ref: Sequence[MixedToken], hyp: Sequence[MixedToken]) -> list[AlignmentOp]:
    """Minimum edit distance alignment (unit S/I/D costs).

    The backtrace prefers C, then S, then D, then I.
    """
    n, m = len(ref), len(hyp)
    d = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        d[i][0] = i
    for j in range(1, m + 1):
        d[0][j] = j
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            diag = d[i - 1][j - 1] + (ref[i - 1] != hyp[j - 1])
            d[i][j] = min(diag, d[i - 1][j] + 1, d[i][j - 1] + 1)
    ops = []
    i, j = n, m
    while i or j:
        if i and j and ref[i - 1] == hyp[j - 1] and d[i][j] == d[i - 1][j - 1]:
            ops.append(AlignmentOp(Op.C, ref[i - 1], hyp[j - 1]))
            i, j = i - 1, j - 1
        elif i and j and d[i][j] == d[i - 1][j - 1] + 1:
            ops.append(AlignmentOp(Op.S, ref[i - 1], hyp[j - 1]))
            i, j = i - 1, j - 1
        elif i and d[i][j] == d[i - 1][j] + 1:
            ops.append(AlignmentOp(Op.D, ref[i - 1], None))
            i -= 1
        else:
            ops.append(AlignmentOp(Op.I, None, hyp[j - 1]))
            j -= 1
    ops.reverse()
    return ops


@dataclass
class ScoreReport:
    n_ref: int = 0
    n_native: int = 0
    n_foreign: int = 0
    correct_native: int = 0
    correct_foreign: int = 0
    counts: dict = field(default_factory=lambda: {k.value: 0 for k in Op})

    @property
    def errors(self) -> int:
        return self.counts["S"] + self.counts["I"] + self.counts["D"]

    @property
    def mer(self) -> float:
        if not self.n_ref:
            raise EmptyReference("no reference tokens")
        return self.errors / self.n_ref

    @property
    def cer_native(self) -> float:
        return 1.0 - self.correct_native / self.n_native if self.n_native else 0.0

    @property
    def wer_foreign(self) -> float:
        return 1.0 - self.correct_foreign / self.n_foreign if self.n_foreign else 0.0

    def __add__(self, other: "ScoreReport") -> "ScoreReport":
        return ScoreReport(
            self.n_ref + other.n_ref,
            self.n_native + other.n_native,
            self.n_foreign + other.n_foreign,
            self.correct_native + other.correct_native,
            self.correct_foreign + other.correct_foreign,
            {k: self.counts[k] + other.counts[k] for k in self.counts},
        )

    def to_json(self) -> dict:
        out = asdict(self)
        out.update(mer=self.mer, cer_native=self.cer_native, wer_foreign=self.wer_foreign)
        return out

    def to_tsv(self) -> str:
        rows = [("mer", self.mer), ("cer_native", self.cer_native), ("wer_foreign", self.wer_foreign)]
        rows += [(k, v) for k, v in self.counts.items()]
        rows += [("n_ref", self.n_ref), ("n_native", self.n_native), ("n_foreign", self.n_foreign)]
        return "".join(f"{k}\t{v:.6f}\n" if isinstance(v, float) else f"{k}\t{v}\n" for k, v in rows)


def _as_tokens(x):
    return tokenize_mixed(x) if isinstance(x, str) else list(x)


def report_from_ops(ops: Iterable[AlignmentOp]) -> ScoreReport:
    rep = ScoreReport()
    for op in ops:
        rep.counts[op.kind.value] += 1
        tok = op.ref_token
        if tok is None:
            continue
        rep.n_ref += 1
        native = tok.language is TokenLang.NATIVE_CHAR
        if native:
            rep.n_native += 1
        else:
            rep.n_foreign += 1
        if op.kind is Op.C:
            if native:
                rep.correct_native += 1
            else:
                rep.correct_foreign += 1
    return rep


def score(ref, hyp) -> ScoreReport:
    """Score one reference/hypothesis pair (strings or token lists)."""
    ref, hyp = _as_tokens(ref), _as_tokens(hyp)
    if not ref:
        raise EmptyReference("empty reference")
    return report_from_ops(align(ref, hyp))


def score_corpus(pairs: Iterable[tuple]) -> ScoreReport:
    """Pool counts over utterances; empty references contribute only insertions."""
    total = ScoreReport()
    for ref, hyp in pairs:
        total = total + report_from_ops(align(_as_tokens(ref), _as_tokens(hyp)))
    if not total.n_ref:
        raise EmptyReference("no reference tokens in corpus")
    return total


def _width(s: str) -> int:
    return sum(2 if re.match(rf"[{_CJK}]", ch) else 1 for ch in s)


def format_alignment(ops: Sequence[AlignmentOp]) -> str:
    """Three lines: reference, hypothesis, op codes, in aligned columns."""
    cols = []
    for op in ops:
        r = op.ref_token.surface if op.ref_token else "*"
        h = op.hyp_token.surface if op.hyp_token else "*"
        cols.append((r, h, op.kind.value))
    lines = []
    for k in range(3):
        cells = []
        for col in cols:
            w = max(_width(c) for c in col)
            cells.append(col[k] + " " * (w - _width(col[k])))
        lines.append(" ".join(cells).rstrip())
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# ARR


@dataclass(frozen=True)
class ArrBucket:
    lo: int
    hi: float  # exclusive; math.inf for the open bucket
    n_words: int
    arr: float | None

    def label(self) -> str:
        hi = "inf" if math.isinf(self.hi) else str(int(self.hi))
        return f"[{self.lo},{hi})"


@dataclass(frozen=True)
class ArrReport:
    buckets: tuple

    def values(self) -> list:
        return [b.arr for b in self.buckets]

    def to_json(self) -> list:
        return [{"bucket": b.label(), "n_words": b.n_words, "arr": b.arr} for b in self.buckets]

    def to_tsv(self) -> str:
        return "".join(f"{b.label()}\t{b.n_words}\t{'' if b.arr is None else f'{b.arr:.6f}'}\n"
                       for b in self.buckets)


def parse_buckets(text: str) -> list[tuple[int, float]]:
    """``"1,10,20"`` -> ``[(1, 10), (10, 20), (20, inf)]``."""
    edges = [int(x) for x in text.split(",") if x.strip()]
    if not edges or sorted(set(edges)) != edges:
        raise ValueError(f"bucket edges must be strictly increasing: {text!r}")
    return [(lo, hi) for lo, hi in zip(edges, edges[1:] + [math.inf])]


def arr(per_word: Mapping[str, tuple[int, int, int]], buckets: Sequence[tuple[int, float]]) -> ArrReport:
    """Average recall rate per driving-volume bucket.

    ``per_word`` maps a word to ``(P_w, T_w, k_w)``: correctly recognised
    occurrences, true occurrences, driving volume.
    """
    for w, (p, t, _) in per_word.items():
        if t < 1 or p < 0 or p > t:
            raise InvalidCounts(f"{w!r}: P={p}, T={t}")
    out = []
    for lo, hi in buckets:
        recalls = [p / t for p, t, k in per_word.values() if lo <= k < hi]
        out.append(ArrBucket(lo, hi, len(recalls), sum(recalls) / len(recalls) if recalls else None))
    return ArrReport(tuple(out))


def dump_json(obj, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, ensure_ascii=False)
        fh.write("\n")

"""Scoring a learned lexicon against the synthetic ground truth.

Two views: pronunciation recovery (is the hidden pronunciation among the
word's entries) and a recognition proxy over held-out utterances.  The proxy
counts an occurrence as recognised when its realised phones are exactly one
of the word's lexicon entries; it stands in for running a real recogniser.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from cslex.metrics import ArrReport, ScoreReport, arr, score_corpus
from cslex.simulate import SyntheticCorpus
from cslex.types import Lexicon


@dataclass(frozen=True)
class Recovery:
    n_words: int
    recovered: int  # hidden pronunciation anywhere in the entry list
    top1: int  # hidden pronunciation is the first entry

    @property
    def rate(self) -> float:
        return self.recovered / self.n_words if self.n_words else float("nan")

    @property
    def top1_rate(self) -> float:
        return self.top1 / self.n_words if self.n_words else float("nan")

    def to_json(self) -> dict:
        return {"n_words": self.n_words, "recovered": self.recovered, "top1": self.top1,
                "rate": self.rate, "top1_rate": self.top1_rate}


def recovery(lex: Lexicon, hidden: Lexicon, words: Iterable[str]) -> Recovery:
    n = rec = top = 0
    for w in sorted(set(words)):
        truth = set(hidden[w])
        prons = lex.get(w, [])
        n += 1
        rec += any(p in truth for p in prons)
        top += bool(prons) and prons[0] in truth
    return Recovery(n, rec, top)


def per_word_recall(lex: Lexicon, corpus: SyntheticCorpus) -> dict[str, tuple[int, int, int]]:
    """``word -> (P_w, T_w, k_w)`` over the held-out occurrences."""
    out = {}
    for w, segs in sorted(corpus.heldout_segments.items()):
        entries = set(lex.get(w, []))
        hits = sum(corpus.heldout_realized[s] in entries for s in segs)
        out[w] = (hits, len(segs), corpus.volume(w))
    return out


def arr_report(lex: Lexicon, corpus: SyntheticCorpus, buckets) -> ArrReport:
    return arr(per_word_recall(lex, corpus), buckets)


def proxy_transcripts(lex: Lexicon, corpus: SyntheticCorpus) -> list[tuple[list[str], list[str]]]:
    """Reference and proxy-recognised token lists for every held-out utterance.

    A foreign occurrence is replaced by the first word (sorted) whose lexicon
    holds its realised phones, or dropped when no word does.
    """
    owners: dict[tuple, str] = {}
    for w, p in lex.pairs():
        owners.setdefault(p, w)
    realized = {}
    for segs in corpus.heldout_segments.values():
        for s in segs:
            realized[(s.utterance_id, s.word, s.occurrence_index)] = corpus.heldout_realized[s]
    pairs = []
    for utt in corpus.heldout:
        hyp, seen = [], {}
        for tok in utt.tokens:
            if tok not in corpus.heldout_segments:
                hyp.append(tok)
                continue
            occ = seen.get(tok, 0)
            seen[tok] = occ + 1
            word = owners.get(realized[(utt.id, tok, occ)])
            if word is not None:
                hyp.append(word)
        pairs.append((list(utt.tokens), hyp))
    return pairs


def _tokens(words):
    from cslex.metrics import tokenize_mixed

    return tokenize_mixed(" ".join(words))


def proxy_score(lex: Lexicon, corpus: SyntheticCorpus) -> ScoreReport:
    return score_corpus((_tokens(r), _tokens(h)) for r, h in proxy_transcripts(lex, corpus))

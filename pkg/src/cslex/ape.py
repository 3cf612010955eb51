"""Average posterior estimation (APE).

A candidate pronunciation ``p`` of word ``w`` is scored by the mean, over the
``M_w`` utterances hosting ``w``, of its utterance-level posterior
``P(w, p | O_u)``.  Posteriors come from a pluggable source; the shipped one
is a softmax over negative edit distances to the realised phones.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Mapping, Protocol, Sequence

import numpy as np

from cslex.distance import distance_matrix
from cslex.errors import EmptyCandidates, WordNotInUtterance
from cslex.simulate import CandidateSet, SyntheticCorpus


@dataclass(frozen=True)
class PosteriorRecord:
    word: str
    pron: tuple
    utterance_id: str
    posterior: float

    def to_json(self) -> dict:
        return {"word": self.word, "pron": " ".join(self.pron), "utt": self.utterance_id, "p": self.posterior}

    @classmethod
    def from_json(cls, row: Mapping) -> "PosteriorRecord":
        return cls(row["word"], tuple(row["pron"].split()), row["utt"], float(row["p"]))


class PosteriorSource(Protocol):
    def hosts(self, word: str) -> list[str]:
        """Ids of the utterances containing ``word`` (M_w of them)."""

    def matrix(self, word: str, hyps: Sequence[tuple], utt_ids: Sequence[str]) -> np.ndarray:
        """Posterior of each hypothesis (columns) in each utterance (rows)."""


def _softmax_rows(x: np.ndarray) -> np.ndarray:
    z = x - x.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


class OraclePosteriors:
    """Softmax of ``-lam * editdist(hyp, realised)`` over the hypothesis set.

    When a word occurs several times in one utterance the per-occurrence
    posteriors are averaged.
    """

    def __init__(self, corpus: SyntheticCorpus, lam: float = 1.0):
        self.corpus = corpus
        self.lam = lam

    def hosts(self, word):
        return self.corpus.host_utterances(word)

    def matrix(self, word, hyps, utt_ids):
        hyps = [tuple(h) for h in hyps]
        occ, owner = [], []
        for row, u in enumerate(utt_ids):
            realized = self.corpus.occurrences(word, u)
            if not realized:
                raise WordNotInUtterance(word, u)
            occ.extend(realized)
            owner.extend([row] * len(realized))
        post = _softmax_rows(-self.lam * distance_matrix(occ, hyps).astype(float))
        out = np.zeros((len(utt_ids), len(hyps)))
        counts = np.zeros(len(utt_ids))
        np.add.at(out, owner, post)
        np.add.at(counts, owner, 1.0)
        return out / counts[:, None]


class RecordPosteriors:
    """Posteriors looked up from imported records; anything missing is 0."""

    def __init__(self, records: Iterable[PosteriorRecord]):
        self._p: dict[tuple, float] = {}
        self._hosts: dict[str, set] = {}
        for r in records:
            self._p[(r.word, tuple(r.pron), r.utterance_id)] = r.posterior
            self._hosts.setdefault(r.word, set()).add(r.utterance_id)

    def hosts(self, word):
        return sorted(self._hosts.get(word, ()))

    def matrix(self, word, hyps, utt_ids):
        return np.array([[self._p.get((word, tuple(h), u), 0.0) for h in hyps] for u in utt_ids])


def posterior_oracle(word: str, hyps: Sequence[tuple], utterance_id: str, corpus: SyntheticCorpus,
                     lam: float = 1.0) -> list[PosteriorRecord]:
    if not hyps:
        raise EmptyCandidates(f"no hypotheses for {word!r}")
    row = OraclePosteriors(corpus, lam).matrix(word, hyps, [utterance_id])[0]
    return [PosteriorRecord(word, tuple(h), utterance_id, float(p)) for h, p in zip(hyps, row)]


def collect_records(word: str, hyps: Sequence[tuple], source: PosteriorSource) -> list[PosteriorRecord]:
    utts = source.hosts(word)
    mat = source.matrix(word, hyps, utts)
    return [PosteriorRecord(word, tuple(h), u, float(mat[i, j]))
            for i, u in enumerate(utts) for j, h in enumerate(hyps)]


@dataclass(frozen=True)
class ApeTable:
    """gamma_w^p for one word's candidates, plus the host-utterance count M_w."""

    word: str
    scores: Mapping[tuple, float]
    m: int

    def ranked(self) -> list[tuple[tuple, float]]:
        return sorted(self.scores.items(), key=_rank_key)

    def __len__(self):
        return len(self.scores)


def _rank_key(item):
    pron, gamma = item
    return (-gamma, len(pron), pron)


def ape_score(candidates: CandidateSet, records: Iterable[PosteriorRecord]) -> ApeTable:
    """Average each candidate's posterior over the word's host utterances.

    Host utterances are those named by the records or by the candidates'
    provenance; a candidate without a record in some host contributes 0 there.
    """
    if not len(candidates):
        raise EmptyCandidates(f"no candidates for {candidates.word!r}")
    hosts = {s.utterance_id for segs in candidates.provenance.values() for s in segs}
    totals = {p: 0.0 for p in candidates}
    for r in records:
        if r.word != candidates.word:
            continue
        hosts.add(r.utterance_id)
        if r.pron in totals:
            totals[r.pron] += r.posterior
    m = len(hosts)
    return ApeTable(candidates.word, {p: t / m for p, t in totals.items()}, m)


def ape_table(word: str, hyps: Sequence[tuple], source: PosteriorSource) -> ApeTable:
    """Same quantity as :func:`ape_score`, computed straight from a posterior matrix."""
    hyps = [tuple(h) for h in hyps]
    if not hyps:
        raise EmptyCandidates(f"no candidates for {word!r}")
    utts = source.hosts(word)
    gamma = source.matrix(word, hyps, utts).sum(axis=0) / len(utts)
    return ApeTable(word, dict(zip(hyps, gamma.tolist())), len(utts))


def select_top(table: ApeTable, n: int) -> list[tuple]:
    """Top ``n`` by gamma; ties go to the shorter, then lexicographically smaller, pronunciation."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return [p for p, _ in table.ranked()[:n]]


def two_pass_prune(candidates: CandidateSet, source: PosteriorSource, keep: int) -> CandidateSet:
    """Keep the ``keep`` best candidates, then rescore them among themselves.

    The second pass renormalises posteriors over the survivors only; the
    returned set is ordered by the second-pass ranking.
    """
    if keep < 1:
        raise ValueError("keep must be >= 1")
    first = ape_table(candidates.word, candidates.candidates, source)
    survivors = select_top(first, keep)
    second = ape_table(candidates.word, survivors, source)
    return candidates.restricted(select_top(second, len(survivors)))


# ---------------------------------------------------------------------------
# file formats


def write_records(records: Iterable[PosteriorRecord], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for r in records:
            fh.write(json.dumps(r.to_json(), ensure_ascii=False, sort_keys=True) + "\n")


def read_records(path) -> list[PosteriorRecord]:
    with open(path, encoding="utf-8") as fh:
        return [PosteriorRecord.from_json(json.loads(line)) for line in fh if line.strip()]


def tables_to_tsv(tables: Iterable[ApeTable]) -> str:
    lines = []
    for t in sorted(tables, key=lambda t: t.word):
        for pron, gamma in t.ranked():
            lines.append(f"{t.word}\t{' '.join(pron)}\t{gamma:.12g}\t{t.m}\n")
    return "".join(lines)

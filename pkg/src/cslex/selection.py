"""Candidate selection: APE, PCN, and the PCN+APE hybrid, per word."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence

from cslex.ape import PosteriorSource, ape_table, two_pass_prune
from cslex.errors import NoSegments
from cslex.pcn import DEFAULT_EPS_WEIGHT, AlignmentCosts, build_pcn, nbest_consensus, pcn_plus_ape
from cslex.simulate import CandidateSet, SyntheticCorpus, collect_candidates
from cslex.types import Lexicon


class SelectionMethod(str, enum.Enum):
    APE = "APE"
    PCN = "PCN"
    PCN_PLUS_APE = "PCN_plus_APE"

    @classmethod
    def parse(cls, text: str) -> "SelectionMethod":
        norm = text.strip().lower().replace("+", "_plus_").replace("__", "_")
        for m in cls:
            if m.value.lower() == norm:
                return m
        raise ValueError(f"unknown selection method {text!r}; expected one of {[m.value for m in cls]}")


@dataclass(frozen=True)
class SelectionConfig:
    method: SelectionMethod = SelectionMethod.APE
    n_out: int = 4
    keep: int = 20  # APE first-pass survivors
    n_pcn: int = 20  # candidates the confusion network is built on
    eps_weight: float = DEFAULT_EPS_WEIGHT
    costs: AlignmentCosts = AlignmentCosts()

    def __post_init__(self):
        if self.n_out < 1 or self.keep < 1 or self.n_pcn < 1:
            raise ValueError("n_out, keep and n_pcn must be >= 1")


def select_word(cands: CandidateSet, source: PosteriorSource, cfg: SelectionConfig) -> list[tuple]:
    """Selected pronunciations for one word, best first (at most ``cfg.n_out``)."""
    if cfg.method is SelectionMethod.APE:
        pruned = two_pass_prune(cands, source, cfg.keep)
        return list(pruned.candidates[:cfg.n_out])
    # APE decides which candidates enter the network; the fold itself runs
    # in decode order
    survivors = set(two_pass_prune(cands, source, cfg.n_pcn).candidates)
    screened = cands.restricted([p for p in cands.candidates if p in survivors])
    if cfg.method is SelectionMethod.PCN:
        net = build_pcn(screened.candidates, cfg.costs)
        return nbest_consensus(net, cfg.n_out, cfg.eps_weight)
    return pcn_plus_ape(screened, source, cfg.costs, n_consensus=cfg.n_out, n_out=cfg.n_out,
                        eps_weight=cfg.eps_weight)


def select_lexicon(corpus: SyntheticCorpus, words: Iterable[str], source: PosteriorSource,
                   cfg: SelectionConfig, n_decode: int = 10) -> Lexicon:
    """Decode, collect and select for every word; words are processed in sorted order."""
    lex = Lexicon()
    for w in sorted(words):
        if not corpus.segments.get(w):
            raise NoSegments(w)
        for pron in select_word(collect_candidates(w, corpus, n_decode), source, cfg):
            lex.add(w, pron)
    return lex


def ape_merge(word: str, preferred: Sequence[tuple], other: Sequence[tuple], source: PosteriorSource,
              n_out: int) -> list[tuple]:
    """Top ``n_out`` by APE over the union; on equal gamma ``preferred`` entries win."""
    preferred = [tuple(p) for p in preferred]
    pool = list(dict.fromkeys(preferred + [tuple(p) for p in other]))
    table = ape_table(word, pool, source)
    rank = set(preferred)
    ordered = sorted(table.scores.items(), key=lambda kv: (-kv[1], kv[0] not in rank, len(kv[0]), kv[0]))
    return [p for p, _ in ordered[:n_out]]


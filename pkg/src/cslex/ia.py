"""Internal assistance (IA).

Words with enough driving volume (the sufficient set A, ``k_w >= P``) get a
data-driven lexicon; a G2P trained on it proposes extra candidates for the
scarce set B (``K <= k_w < P``), and APE picks between those proposals and
B's own data-driven candidates.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

from cslex.ape import PosteriorSource
from cslex.errors import EmptySufficientSet, InvalidThreshold
from cslex.g2p import G2pConfig, G2pModel, train
from cslex.selection import SelectionConfig, SelectionMethod, ape_merge, select_lexicon
from cslex.simulate import SyntheticCorpus
from cslex.types import Lexicon

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class IaConfig:
    k_min: int = 10
    threshold: int = 20
    selection: SelectionMethod = SelectionMethod.APE
    n_candidates: int = 4

    def __post_init__(self):
        if self.k_min < 1:
            raise InvalidThreshold(f"k_min must be >= 1, got {self.k_min}")
        if self.threshold <= self.k_min:
            raise InvalidThreshold(f"threshold {self.threshold} must exceed k_min {self.k_min}")
        if self.n_candidates < 1:
            raise ValueError("n_candidates must be >= 1")


@dataclass(frozen=True)
class MaterialSet:
    k_min: int
    words: frozenset
    volume: int  # total segments over ``words``


@dataclass(frozen=True)
class MaterialPartition:
    dm_k: frozenset
    sufficient: frozenset
    scarce: frozenset
    threshold: int


@dataclass
class IaArtifacts:
    partition: MaterialPartition
    lexicon0: Lexicon
    lexicon1: Lexicon
    lexicon2: Lexicon
    lexicon3: Lexicon
    seed: Lexicon
    model: G2pModel | None = None
    counts: dict = field(default_factory=dict)

    def stages(self) -> dict[str, Lexicon]:
        return {"lex0": self.lexicon0, "lex1": self.lexicon1, "lex2": self.lexicon2,
                "lex3": self.lexicon3, "seed": self.seed}


def build_material_set(corpus: SyntheticCorpus, k_min: int) -> MaterialSet:
    if k_min < 1:
        raise InvalidThreshold(f"k_min must be >= 1, got {k_min}")
    vols = corpus.volumes()
    words = frozenset(w for w, k in vols.items() if k >= k_min)
    return MaterialSet(k_min, words, sum(vols[w] for w in words))


def partition(dm: MaterialSet, threshold: int, volumes: dict[str, int]) -> MaterialPartition:
    if threshold <= dm.k_min:
        raise InvalidThreshold(f"threshold {threshold} must exceed k_min {dm.k_min}")
    a = frozenset(w for w in dm.words if volumes[w] >= threshold)
    if not a and dm.words:
        warnings.warn(f"no word reaches volume {threshold}; internal assistance has nothing to learn from",
                      stacklevel=2)
    return MaterialPartition(dm.words, a, dm.words - a, threshold)


def run_ia(corpus: SyntheticCorpus, cfg: IaConfig, g2p_cfg: G2pConfig, source: PosteriorSource,
           sel: SelectionConfig | None = None, n_decode: int = 10) -> IaArtifacts:
    sel = SelectionConfig(method=cfg.selection, n_out=cfg.n_candidates) if sel is None else sel
    if sel.method is not cfg.selection or sel.n_out != cfg.n_candidates:
        raise ValueError("selection config disagrees with the IA config")
    vols = corpus.volumes()
    part = partition(build_material_set(corpus, cfg.k_min), cfg.threshold, vols)
    if not part.sufficient:
        raise EmptySufficientSet(f"no word has driving volume >= {cfg.threshold}")

    lex0 = select_lexicon(corpus, part.sufficient, source, sel, n_decode)
    lex2 = select_lexicon(corpus, part.scarce, source, sel, n_decode)
    if not part.scarce:
        return IaArtifacts(part, lex0, Lexicon(), lex2, Lexicon(), lex0.merged(Lexicon()),
                           counts=_counts(part, vols))

    model = train(lex0, g2p_cfg)
    lex1, lex3 = Lexicon(), Lexicon()
    for w in sorted(part.scarce):
        for p in model.predict(w, cfg.n_candidates):
            lex1.add(w, p)
        # data-driven candidates win APE ties
        for p in ape_merge(w, lex2[w], lex1.get(w, []), source, cfg.n_candidates):
            lex3.add(w, p)
    log.info("IA: |A|=%d |B|=%d", len(part.sufficient), len(part.scarce))
    return IaArtifacts(part, lex0, lex1, lex2, lex3, lex0.merged(lex3), model, _counts(part, vols))


def _counts(part: MaterialPartition, vols) -> dict:
    return {
        "dm_k_words": len(part.dm_k),
        "dm_k_segments": sum(vols[w] for w in part.dm_k),
        "sufficient_words": len(part.sufficient),
        "scarce_words": len(part.scarce),
    }

"""Multi-seed experiments shared by ``scripts/`` and the acceptance tests.

Each function runs one seed and returns plain numbers; averaging over seeds
is left to the caller.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from cslex.ape import OraclePosteriors
from cslex.config import PipelineConfig
from cslex.evaluate import arr_report, recovery
from cslex.ia import run_ia
from cslex.metrics import parse_buckets
from cslex.pipeline import corpus_from_config
from cslex.selection import SelectionMethod, select_lexicon


def with_seed(cfg: PipelineConfig, seed: int) -> PipelineConfig:
    """Same config with the corpus and G2P seeds set to ``seed``."""
    return replace(cfg, corpus=replace(cfg.corpus, seed=seed), g2p=replace(cfg.g2p, seed=seed))


def arr_trend(cfg: PipelineConfig, seed: int) -> list:
    """ARR per volume bucket for a data-driven lexicon over every word (no G2P)."""
    cfg = with_seed(cfg, seed)
    corpus = corpus_from_config(cfg)
    lex = select_lexicon(corpus, corpus.words(), OraclePosteriors(corpus, cfg.decode.lam),
                         cfg.selection_config(), cfg.decode.n)
    return arr_report(lex, corpus, parse_buckets(cfg.score.buckets)).values()


@dataclass(frozen=True)
class IaRow:
    seed: int
    n_sufficient: int
    n_scarce: int
    scarce_without_ia: float  # recovery rate over B, data-driven only
    scarce_with_ia: float  # recovery rate over B after the G2P-assisted merge
    material_ape: float  # recovery rate over DM_K, plain APE
    material_hybrid: float  # recovery rate over DM_K, PCN+APE


def ia_comparison(cfg: PipelineConfig, seed: int) -> IaRow:
    """Paired comparison on one corpus: IA on/off for B, and APE vs PCN+APE over DM_K.

    The IA side uses ``cfg.selection`` for the data-driven lexicons; the method
    comparison overrides it.
    """
    cfg = with_seed(cfg, seed)
    corpus = corpus_from_config(cfg)
    source = OraclePosteriors(corpus, cfg.decode.lam)
    hidden = corpus.hidden_lexicon
    art = run_ia(corpus, cfg.ia_config(), cfg.g2p, source, cfg.selection_config(), cfg.decode.n)
    part = art.partition

    def material(method):
        sel = replace(cfg.selection_config(), method=method)
        return recovery(select_lexicon(corpus, part.dm_k, source, sel, cfg.decode.n), hidden, part.dm_k).rate

    return IaRow(
        seed,
        len(part.sufficient),
        len(part.scarce),
        recovery(art.lexicon2, hidden, part.scarce).rate,
        recovery(art.lexicon3, hidden, part.scarce).rate,
        material(SelectionMethod.APE),
        material(SelectionMethod.PCN_PLUS_APE),
    )

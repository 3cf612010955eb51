"""End-to-end run: decode, select, optional IA, G2P, scoring, manifest."""

from __future__ import annotations

import hashlib
import json
import logging
import os
from dataclasses import dataclass, field

from cslex.ape import OraclePosteriors
from cslex.config import PipelineConfig
from cslex.evaluate import Recovery, arr_report, proxy_score, recovery
from cslex.g2p import G2pModel, train
from cslex.ia import IaArtifacts, build_material_set, run_ia
from cslex.metrics import ArrReport, ScoreReport, parse_buckets
from cslex.selection import select_lexicon
from cslex.simulate import SyntheticCorpus, generate_corpus
from cslex.types import Lexicon, write_lexicon

log = logging.getLogger(__name__)


def corpus_from_config(cfg: PipelineConfig) -> SyntheticCorpus:
    c = cfg.corpus
    return generate_corpus(c.n_words, c.volume_law, c.noise(), c.seed, heldout_per_word=c.heldout_per_word)


@dataclass
class PipelineResult:
    seed_lexicon: Lexicon
    predictions: Lexicon
    final_lexicon: Lexicon
    material_words: frozenset
    oov_words: frozenset
    ia: IaArtifacts | None = None
    model: G2pModel | None = None
    report: ScoreReport | None = None
    arr: ArrReport | None = None
    recovery: dict[str, Recovery] = field(default_factory=dict)


def build_seed(corpus: SyntheticCorpus, cfg: PipelineConfig) -> tuple[Lexicon, frozenset, IaArtifacts | None]:
    """Seed lexicon over the material set, with or without internal assistance."""
    source = OraclePosteriors(corpus, cfg.decode.lam)
    dm = build_material_set(corpus, cfg.ia.k_min)
    if cfg.ia.enabled:
        art = run_ia(corpus, cfg.ia_config(), cfg.g2p, source, cfg.selection_config(), cfg.decode.n)
        return art.seed, dm.words, art
    return select_lexicon(corpus, dm.words, source, cfg.selection_config(), cfg.decode.n), dm.words, None


def run_pipeline(corpus: SyntheticCorpus, cfg: PipelineConfig, train_g2p: bool = True) -> PipelineResult:
    """Seed lexicon for words with ``k_w >= k_min``; G2P predictions (beam 4) for the rest.

    Scoring against the hidden lexicon happens only when the corpus carries it.
    """
    seed, dm_words, art = build_seed(corpus, cfg)
    oov = frozenset(set(corpus.words()) | set(corpus.heldout_segments)) - dm_words
    model, predictions = None, Lexicon()
    if train_g2p and len(seed):
        model = train(seed, cfg.g2p)
        for w in sorted(oov):
            for p in model.predict(w, cfg.g2p.beam):
                predictions.add(w, p)
    final = seed.merged(predictions)
    res = PipelineResult(seed, predictions, final, dm_words, oov, art, model)
    if corpus.heldout:
        res.report = proxy_score(final, corpus)
        res.arr = arr_report(final, corpus, parse_buckets(cfg.score.buckets))
    hidden = corpus.hidden_lexicon
    if hidden is not None:
        res.recovery = {"material": recovery(seed, hidden, dm_words),
                        "oov": recovery(predictions, hidden, oov),
                        "all": recovery(final, hidden, set(hidden.words()))}
        if art is not None:
            res.recovery["scarce_ia"] = recovery(art.lexicon3, hidden, art.partition.scarce)
            res.recovery["scarce_data_driven"] = recovery(art.lexicon2, hidden, art.partition.scarce)
    return res


# ---------------------------------------------------------------------------
# outputs


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_json(obj, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, ensure_ascii=False)
        fh.write("\n")


def write_manifest(out_dir, command: str, paths, extra: dict | None = None) -> str:
    """``manifest.json`` listing every output file once with its sha256."""
    entries = {}
    for p in paths:
        rel = os.path.relpath(p, out_dir)
        entries[rel] = sha256_file(p)
    manifest = {"command": command, "files": [{"path": k, "sha256": v} for k, v in sorted(entries.items())]}
    manifest.update(extra or {})
    path = os.path.join(out_dir, "manifest.json")
    write_json(manifest, path)
    return path


def save_result(res: PipelineResult, cfg: PipelineConfig, out_dir) -> list[str]:
    os.makedirs(out_dir, exist_ok=True)
    written = []

    def lex(name, lexicon):
        path = os.path.join(out_dir, name)
        write_lexicon(lexicon, path)
        written.append(path)

    lex("seed.tsv", res.seed_lexicon)
    lex("predictions.tsv", res.predictions)
    lex("final.tsv", res.final_lexicon)
    if res.ia is not None:
        for stage, lexicon in res.ia.stages().items():
            lex(f"lexicon.{stage}", lexicon)
    if res.model is not None:
        path = os.path.join(out_dir, "g2p.json")
        res.model.save(path)
        written.append(path)
    if res.report is not None:
        for name, text in (("score.json", None), ("score.tsv", res.report.to_tsv())):
            path = os.path.join(out_dir, name)
            if text is None:
                write_json(res.report.to_json(), path)
            else:
                with open(path, "w", encoding="utf-8", newline="\n") as fh:
                    fh.write(text)
            written.append(path)
    if res.arr is not None:
        path = os.path.join(out_dir, "arr.json")
        write_json(res.arr.to_json(), path)
        written.append(path)
    if res.recovery:
        path = os.path.join(out_dir, "recovery.json")
        write_json({k: v.to_json() for k, v in res.recovery.items()}, path)
        written.append(path)
    path = os.path.join(out_dir, "config.ini")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(cfg.to_ini())
    written.append(path)
    return written

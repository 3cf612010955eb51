"""Command line front end.

Every verb accepts ``--seed``, ``--config`` (INI file), ``--out`` (output
directory) and repeated ``--set section.key=value`` overrides.  Each verb
writes a ``manifest.json`` with a sha256 for every file it produced.
Failures print one JSON object to stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace

from cslex import __version__
from cslex.ape import OraclePosteriors, RecordPosteriors, ape_table, collect_records, read_records, select_top
from cslex.ape import tables_to_tsv, write_records
from cslex.config import PipelineConfig, load_config
from cslex.errors import CslexError, LineCountMismatch
from cslex.evaluate import per_word_recall
from cslex.g2p import G2pModel, train
from cslex.ia import run_ia
from cslex.metrics import align, arr, format_alignment, parse_buckets, report_from_ops, score_corpus, tokenize_mixed
from cslex.pcn import build_pcn, nbest_consensus
from cslex.pipeline import corpus_from_config, run_pipeline, save_result, write_json, write_manifest
from cslex.selection import SelectionMethod, select_lexicon
from cslex.simulate import collect_candidates, load_corpus, save_corpus
from cslex.types import Lexicon, read_lexicon, write_lexicon

log = logging.getLogger("cslex")


def _config(args) -> PipelineConfig:
    overrides = list(args.set or [])
    if args.seed is not None:
        overrides += [f"corpus.seed={args.seed}", f"g2p.seed={args.seed}"]
    return load_config(args.config, overrides)


def _out(args, *names) -> str:
    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, *names)


def _load(args, with_hidden=False):
    hidden = with_hidden and os.path.exists(os.path.join(args.corpus, "hidden.groundtruth.tsv"))
    return load_corpus(args.corpus, with_hidden=hidden)


def _finish(args, command, paths, cfg=None, **extra):
    meta = {"version": __version__}
    if cfg is not None:
        meta["config"] = cfg.to_dict()
    meta.update(extra)
    write_manifest(args.out, command, paths, meta)
    for p in paths:
        print(p)


def _source(args, corpus, cfg):
    if getattr(args, "posteriors", None):
        return RecordPosteriors(read_records(args.posteriors))
    return OraclePosteriors(corpus, cfg.decode.lam)


# ---------------------------------------------------------------------------
# verbs


def cmd_simulate(args):
    cfg = _config(args)
    corpus = corpus_from_config(cfg)
    paths = save_corpus(corpus, args.out)
    cfg_path = _out(args, "config.ini")
    with open(cfg_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(cfg.to_ini())
    _finish(args, "simulate", paths + [cfg_path], cfg)


def cmd_decode(args):
    cfg = _config(args)
    corpus = _load(args)
    path = _out(args, "candidates.jsonl")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for w in corpus.words():
            cs = collect_candidates(w, corpus, cfg.decode.n)
            for p in cs.candidates:
                row = {"word": w, "pron": " ".join(p), "segments": len(cs.provenance[p])}
                fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")
    _finish(args, "decode", [path], cfg)


def cmd_ape(args):
    cfg = _config(args)
    corpus = _load(args)
    source = _source(args, corpus, cfg)
    tables, records, selected = [], [], Lexicon()
    for w in corpus.words():
        hyps = collect_candidates(w, corpus, cfg.decode.n).candidates
        table = ape_table(w, hyps, source)
        tables.append(table)
        if args.export_posteriors:
            records.extend(collect_records(w, hyps, source))
        for p in select_top(table, cfg.selection.n_out):
            selected.add(w, p)
    paths = [_out(args, "ape.tsv"), _out(args, "selected.tsv")]
    with open(paths[0], "w", encoding="utf-8", newline="\n") as fh:
        fh.write(tables_to_tsv(tables))
    write_lexicon(selected, paths[1])
    if args.export_posteriors:
        paths.append(_out(args, "posteriors.jsonl"))
        write_records(records, paths[-1])
    _finish(args, "ape", paths, cfg)


def cmd_pcn(args):
    cfg = _config(args)
    sel = cfg.selection_config()
    cands = read_lexicon(args.candidates)
    n = args.n or sel.n_out
    dump_path, cons_path = _out(args, "pcn.txt"), _out(args, "consensus.tsv")
    consensus = Lexicon()
    with open(dump_path, "w", encoding="utf-8", newline="\n") as fh:
        for w, prons in cands.items():
            net = build_pcn(prons, sel.costs)
            fh.write(f"# {w}\n{net.dump()}")
            for p in nbest_consensus(net, n, sel.eps_weight):
                consensus.add(w, p)
    write_lexicon(consensus, cons_path)
    _finish(args, "pcn", [dump_path, cons_path], cfg)


def cmd_select(args):
    cfg = _config(args)
    if args.method:
        cfg = replace(cfg, selection=replace(cfg.selection, method=SelectionMethod.parse(args.method).value))
    corpus = _load(args)
    words = [w for w, k in corpus.volumes().items() if k >= args.k_min]
    lex = select_lexicon(corpus, words, _source(args, corpus, cfg), cfg.selection_config(), cfg.decode.n)
    path = _out(args, "selected.tsv")
    write_lexicon(lex, path)
    _finish(args, "select", [path], cfg)


def cmd_ia(args):
    cfg = _config(args)
    corpus = _load(args)
    art = run_ia(corpus, cfg.ia_config(), cfg.g2p, _source(args, corpus, cfg), cfg.selection_config(),
                 cfg.decode.n)
    paths = []
    for stage, lex in art.stages().items():
        paths.append(_out(args, f"lexicon.{stage}"))
        write_lexicon(lex, paths[-1])
    if art.model is not None:
        paths.append(_out(args, "g2p.json"))
        art.model.save(paths[-1])
    _finish(args, "ia", paths, cfg, counts=art.counts)


def cmd_g2p_train(args):
    cfg = _config(args)
    model = train(read_lexicon(args.lexicon), cfg.g2p)
    path = _out(args, "g2p.json")
    model.save(path)
    _finish(args, "g2p-train", [path], cfg, final_loss=model.final_loss)


def cmd_g2p_predict(args):
    cfg = _config(args)
    model = G2pModel.load(args.model)
    words = list(args.word or [])
    if args.words:
        with open(args.words, encoding="utf-8") as fh:
            words += [line.strip() for line in fh if line.strip()]
    beam = args.beam or model.config.beam
    lex = Lexicon()
    for w in words:
        for p in model.predict(w, beam):
            lex.add(w, p)
    path = _out(args, "predictions.tsv")
    write_lexicon(lex, path)
    _finish(args, "g2p-predict", [path], cfg, beam=beam)


def _lines(path):
    with open(path, encoding="utf-8") as fh:
        return [line.rstrip("\n") for line in fh]


def cmd_score(args):
    cfg = _config(args)
    ref, hyp = _lines(args.ref), _lines(args.hyp)
    if len(ref) != len(hyp):
        raise LineCountMismatch(len(ref), len(hyp))
    pairs = [(tokenize_mixed(r), tokenize_mixed(h)) for r, h in zip(ref, hyp)]
    report = score_corpus(pairs)
    paths = [_out(args, "score.json"), _out(args, "score.tsv"), _out(args, "alignment.txt")]
    write_json(report.to_json(), paths[0])
    with open(paths[1], "w", encoding="utf-8", newline="\n") as fh:
        fh.write(report.to_tsv())
    with open(paths[2], "w", encoding="utf-8", newline="\n") as fh:
        for k, (r, h) in enumerate(pairs, start=1):
            ops = align(r, h)
            fh.write(f"# line {k} mer={report_from_ops(ops).mer if r else float('nan'):.4f}\n")
            fh.write(format_alignment(ops))
    _finish(args, "score", paths, cfg)


def _read_counts(path):
    out = {}
    for k, line in enumerate(_lines(path), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 4:
            raise ValueError(f"{path}:{k}: expected word<TAB>P<TAB>T<TAB>k")
        out[parts[0]] = tuple(int(x) for x in parts[1:])
    return out


def cmd_arr(args):
    cfg = _config(args)
    buckets = parse_buckets(args.buckets or cfg.score.buckets)
    if args.counts:
        per_word = _read_counts(args.counts)
    else:
        if not (args.lexicon and args.corpus):
            raise ValueError("arr needs --counts, or --lexicon together with --corpus")
        per_word = per_word_recall(read_lexicon(args.lexicon), _load(args))
    report = arr(per_word, buckets)
    paths = [_out(args, "arr.json"), _out(args, "arr.tsv")]
    write_json(report.to_json(), paths[0])
    with open(paths[1], "w", encoding="utf-8", newline="\n") as fh:
        fh.write(report.to_tsv())
    _finish(args, "arr", paths, cfg)


def cmd_pipeline(args):
    cfg = _config(args)
    if args.method:
        cfg = replace(cfg, selection=replace(cfg.selection, method=SelectionMethod.parse(args.method).value))
    if args.ia:
        cfg = replace(cfg, ia=replace(cfg.ia, enabled=True))
    paths = []
    if args.corpus:
        corpus = _load(args, with_hidden=args.oracle)
    else:
        corpus = corpus_from_config(cfg)
        paths += save_corpus(corpus, _out(args, "corpus"))
    res = run_pipeline(corpus, cfg, train_g2p=not args.no_g2p)
    paths += save_result(res, cfg, args.out)
    summary = {k: v.to_json() for k, v in res.recovery.items()}
    if res.report is not None:
        summary["mer"] = res.report.mer
    _finish(args, "pipeline", paths, cfg, summary=summary)


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="corpus and G2P seed")
    common.add_argument("--config", help="INI config file")
    common.add_argument("--out", default="out", help="output directory (default: out)")
    common.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE", help="config override")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="cslex", description="Pronunciation lexicon learning for code-switching ASR.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def verb(name, fn, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(fn=fn)
        return sp

    verb("simulate", cmd_simulate, "generate a synthetic corpus")
    sp = verb("decode", cmd_decode, "n-best decode every segment, union per word")
    sp.add_argument("--corpus", required=True)
    sp = verb("ape", cmd_ape, "rank candidates by average posterior")
    sp.add_argument("--corpus", required=True)
    sp.add_argument("--posteriors", help="posterior records (JSONL) instead of the built-in oracle")
    sp.add_argument("--export-posteriors", action="store_true", help="also write posteriors.jsonl")
    sp = verb("pcn", cmd_pcn, "confusion-network consensus over a candidate lexicon")
    sp.add_argument("--candidates", required=True, help="lexicon TSV; per-word order is the fold order")
    sp.add_argument("-n", type=int, help="consensus outputs per word (default: selection.n_out)")
    sp = verb("select", cmd_select, "build a selected lexicon with APE, PCN or PCN_plus_APE")
    sp.add_argument("--corpus", required=True)
    sp.add_argument("--method", help="APE, PCN or PCN_plus_APE (overrides selection.method)")
    sp.add_argument("--k-min", type=int, default=1, help="only words with at least this many segments")
    sp.add_argument("--posteriors")
    sp = verb("ia", cmd_ia, "internal assistance: lexicon0..3 and the merged seed")
    sp.add_argument("--corpus", required=True)
    sp.add_argument("--posteriors")
    sp = verb("g2p-train", cmd_g2p_train, "train the G2P model on a lexicon")
    sp.add_argument("--lexicon", required=True)
    sp = verb("g2p-predict", cmd_g2p_predict, "beam-search pronunciations for words")
    sp.add_argument("--model", required=True)
    sp.add_argument("--word", action="append")
    sp.add_argument("--words", help="file with one word per line")
    sp.add_argument("--beam", type=int)
    sp = verb("score", cmd_score, "MER / CER / WER of a hypothesis file against a reference file")
    sp.add_argument("--ref", required=True)
    sp.add_argument("--hyp", required=True)
    sp = verb("arr", cmd_arr, "average recall rate per driving-volume bucket")
    sp.add_argument("--counts", help="TSV: word, P, T, k")
    sp.add_argument("--lexicon")
    sp.add_argument("--corpus")
    sp.add_argument("--buckets", help='edges, e.g. "1,10,20"')
    sp = verb("pipeline", cmd_pipeline, "decode, select, [IA], G2P, score")
    sp.add_argument("--corpus", help="corpus directory (default: simulate from the config)")
    sp.add_argument("--method")
    sp.add_argument("--ia", action="store_true", help="enable internal assistance")
    sp.add_argument("--no-g2p", action="store_true", help="skip G2P training and prediction")
    sp.add_argument("--oracle", action="store_true",
                    help="read the corpus's ground-truth lexicon and report recovery against it")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.fn(args)
    except CslexError as e:
        print(json.dumps(e.to_json(), ensure_ascii=False, default=str), file=sys.stderr)
        return 2
    except (ValueError, KeyError, OSError) as e:
        print(json.dumps({"error": type(e).__name__, "message": str(e)}, ensure_ascii=False), file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

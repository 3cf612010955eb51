from cslex.evaluate import per_word_recall, proxy_score, proxy_transcripts, recovery
from cslex.types import Lexicon


def test_recovery_counts():
    hidden = Lexicon({"a": [("x",)], "b": [("y",)], "c": [("z",)]})
    lex = Lexicon({"a": [("x",), ("q",)], "b": [("q",), ("y",)]})
    r = recovery(lex, hidden, ["a", "b", "c"])
    assert (r.n_words, r.recovered, r.top1) == (3, 2, 1)
    assert r.rate == 2 / 3 and r.top1_rate == 1 / 3


def test_truth_lexicon_is_perfect(noisy_corpus):
    c = noisy_corpus
    # every held-out realisation listed: recall 1 everywhere, proxy MER 0
    lex = Lexicon()
    for w, segs in c.heldout_segments.items():
        for s in segs:
            lex.add(w, c.heldout_realized[s])
    assert all(p == t for p, t, _ in per_word_recall(lex, c).values())
    assert proxy_score(lex, c).mer == 0.0


def test_empty_lexicon_drops_every_foreign_word(noisy_corpus):
    c = noisy_corpus
    pairs = proxy_transcripts(Lexicon(), c)
    for (ref, hyp), utt in zip(pairs, c.heldout):
        assert hyp == [t for t in ref if t not in c.heldout_segments]
    rep = proxy_score(Lexicon(), c)
    assert rep.wer_foreign == 1.0 and rep.counts["I"] == 0


def test_per_word_recall_volumes(noisy_corpus):
    c = noisy_corpus
    out = per_word_recall(c.hidden_lexicon, c)
    for w, (p, t, k) in out.items():
        assert k == c.volume(w) and t == len(c.heldout_segments[w]) and 0 <= p <= t

import itertools

import hypothesis
import hypothesis.strategies as st
import numpy as np
import pytest
from scipy import stats

from cslex.distance import edit_distance
from cslex.errors import InvalidDistribution, NoSegments, UnknownSegment
from cslex.simulate import (
    NoiseModel,
    Segment,
    VolumeLaw,
    collect_candidates,
    decode_segment,
    edit_neighbourhood,
    generate_corpus,
    load_corpus,
    save_corpus,
    tone_confusion,
)
from cslex.types import PhonemeInventory, default_native_inventory

SMALL = PhonemeInventory.from_symbols("small", ["a", "b", "c", "d"])


def _within_two_edits(seq, symbols):
    """Every string at edit distance <= 2 from ``seq`` (brute force by length)."""
    out = set()
    for length in range(max(0, len(seq) - 2), len(seq) + 3):
        for cand in itertools.product(symbols, repeat=length):
            if cand and edit_distance(cand, seq) <= 2:
                out.add(cand)
    return out


def test_noiseless_realisation_is_identity(noiseless_corpus):
    c = noiseless_corpus
    for s, realized in c.realized.items():
        assert realized == c.hidden_lexicon[s.word][0]


def test_generation_is_deterministic():
    a = generate_corpus(30, "zipf:s=1.1,max=30", NoiseModel(0.2, 0.1, 0.1), seed=4)
    b = generate_corpus(30, "zipf:s=1.1,max=30", NoiseModel(0.2, 0.1, 0.1), seed=4)
    assert a.utterances == b.utterances
    assert a.realized == b.realized
    assert a.hidden_lexicon == b.hidden_lexicon


def test_every_foreign_token_has_a_segment(noisy_corpus):
    c = noisy_corpus
    n_tokens = sum(len(u.foreign_tokens()) for u in c.utterances)
    assert n_tokens == sum(c.volumes().values())


def test_zipf_volumes_follow_the_law():
    law = VolumeLaw.parse("zipf:s=1.1,max=200")
    edges = [1, 2, 3, 4, 5, 7, 10, 15, 20, 30, 50, 100, 201]
    pmf, ks = law.pmf(), law.support()
    expected_p = np.array([pmf[(ks >= lo) & (ks < hi)].sum() for lo, hi in zip(edges, edges[1:])])
    for seed in range(5):
        c = generate_corpus(880, law, NoiseModel(), seed=seed, heldout_per_word=0)
        vols = np.array(list(c.volumes().values()))
        observed = np.histogram(vols, bins=edges)[0]
        assert observed.sum() == 880
        assert stats.chisquare(observed, expected_p * 880).pvalue > 0.01


@pytest.mark.parametrize("text", ["zipf:s=0", "uniform:lo=0,hi=3", "bogus", "zipf:s=x", "const"])
def test_bad_volume_law(text):
    with pytest.raises(InvalidDistribution):
        VolumeLaw.parse(text)


def test_bad_noise_rates():
    with pytest.raises(InvalidDistribution):
        NoiseModel(0.7, 0.2, 0.2)


def test_tone_confusion_stays_within_final():
    conf = tone_confusion(default_native_inventory())
    assert set(conf["iao1"]) == {"iao2", "iao3", "iao4", "iao5"}


def test_decode_n1_noiseless_is_truth(noiseless_corpus):
    c = noiseless_corpus
    for w in c.words():
        s = c.segments[w][0]
        assert decode_segment(s, c, n=1) == [c.hidden_lexicon[w][0]]


@hypothesis.given(st.lists(st.sampled_from(SMALL.symbols), min_size=1, max_size=3), st.integers(1, 40))
@hypothesis.settings(max_examples=40)
def test_neighbourhood_matches_exhaustive_ranking(seq, n):
    seq = tuple(seq)
    ranked = sorted(_within_two_edits(seq, SMALL.symbols), key=lambda p: (edit_distance(p, seq), p))
    assert edit_neighbourhood(seq, SMALL, n) == ranked[:n]


def test_length_one_realisation_neighbourhood_count():
    every = _within_two_edits(("a",), SMALL.symbols)
    assert len(edit_neighbourhood(("a",), SMALL, 10)) == min(10, len(every))
    assert len(edit_neighbourhood(("a",), SMALL, 10_000)) == len(every)


def test_decode_scores_are_sorted(noisy_corpus):
    c = noisy_corpus
    s = c.segments[c.words()[0]][0]
    scored = decode_segment(s, c, n=12, lam=2.0, with_scores=True)
    scores = [sc for _, sc in scored]
    assert scores == sorted(scores, reverse=True)
    assert scored[0] == (c.realized[s], 0.0)


def test_unknown_segment(noisy_corpus):
    with pytest.raises(UnknownSegment):
        decode_segment(Segment("nope", "utt999999", 0), noisy_corpus)


def test_candidates_are_union_of_decodes(noisy_corpus):
    c = noisy_corpus
    for w in c.words()[:15]:
        cs = collect_candidates(w, c, n=6)
        union = set()
        for s in c.segments[w]:
            union.update(decode_segment(s, c, n=6))
        assert set(cs.candidates) == union
        for p, segs in cs.provenance.items():
            assert all(p in decode_segment(s, c, n=6) for s in segs)


def test_single_segment_union(noisy_corpus):
    c = noisy_corpus
    w = next(w for w in c.words() if c.volume(w) == 1)
    assert list(collect_candidates(w, c, 7).candidates) == decode_segment(c.segments[w][0], c, 7)


def test_identical_realisations_do_not_grow_union(noiseless_corpus):
    c = noiseless_corpus
    w = next(w for w in c.words() if c.volume(w) > 3)
    assert len(collect_candidates(w, c, 10)) == len(decode_segment(c.segments[w][0], c, 10))


def test_union_monotone_in_segments(noisy_corpus):
    c = noisy_corpus
    w = max(c.words(), key=c.volume)
    seen = set()
    for s in c.segments[w]:
        before = len(seen)
        seen.update(decode_segment(s, c, 10))
        assert len(seen) >= before


def test_no_segments():
    c = generate_corpus(5, "const:k=1", NoiseModel(), seed=0)
    with pytest.raises(NoSegments):
        collect_candidates("zzzz", c)


def test_save_load_roundtrip(tmp_path, noisy_corpus):
    save_corpus(noisy_corpus, tmp_path)
    back = load_corpus(tmp_path)
    assert back.hidden_lexicon is None
    assert back.realized == noisy_corpus.realized
    assert back.heldout == noisy_corpus.heldout
    assert load_corpus(tmp_path, with_hidden=True).hidden_lexicon == noisy_corpus.hidden_lexicon

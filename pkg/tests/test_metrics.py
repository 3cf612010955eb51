import functools
import math

import hypothesis
import hypothesis.strategies as st
import pytest

from cslex.errors import EmptyReference, InvalidCounts, MixedScriptToken
from cslex.metrics import (
    MixedToken,
    Op,
    TokenLang,
    align,
    arr,
    format_alignment,
    parse_buckets,
    score,
    score_corpus,
    tokenize_mixed,
)

from conftest import WORKED_HYP, WORKED_REF

N, F = TokenLang.NATIVE_CHAR, TokenLang.FOREIGN_WORD
tokens = st.lists(st.sampled_from(["好", "去", "吧", "ok", "office", "opus"]), max_size=8).map(
    lambda xs: [MixedToken(x, F if x.isascii() else N) for x in xs])


def recursive_distance(a, b):
    @functools.lru_cache(maxsize=None)
    def go(i, j):
        if i == len(a):
            return len(b) - j
        if j == len(b):
            return len(a) - i
        return min(go(i + 1, j + 1) + (a[i] != b[j]), go(i + 1, j) + 1, go(i, j + 1) + 1)

    return go(0, 0)


def test_tokenize_examples():
    assert tokenize_mixed("好") == [MixedToken("好", N)]
    assert tokenize_mixed("去 office 吗") == [MixedToken("去", N), MixedToken("office", F), MixedToken("吗", N)]
    assert len(tokenize_mixed(WORKED_REF)) == 8
    assert tokenize_mixed("你好，world!") == [MixedToken("你", N), MixedToken("好", N), MixedToken("world", F)]


@pytest.mark.parametrize("bad", ["mp3", "café"])
def test_mixed_script_token(bad):
    with pytest.raises(MixedScriptToken):
        tokenize_mixed(f"去 {bad}")


def test_worked_example():
    rep = score(WORKED_REF, WORKED_HYP)
    assert rep.counts == {"C": 6, "S": 1, "I": 0, "D": 1}
    assert round(rep.mer * 100, 1) == 25.0
    assert round(rep.cer_native * 100, 1) == 14.3
    assert round(rep.wer_foreign * 100, 1) == 100.0
    assert rep.mer == 2 / 8 and rep.cer_native == pytest.approx(1 - 6 / 7) and rep.wer_foreign == 1.0


def test_identical_and_empty_hypothesis():
    rep = score("我去office", "我去office")
    assert (rep.mer, rep.cer_native, rep.wer_foreign) == (0.0, 0.0, 0.0)
    ops = align(tokenize_mixed("我去"), [])
    assert [o.kind for o in ops] == [Op.D, Op.D]
    with pytest.raises(EmptyReference):
        score("", "我")


def test_insertions_only_hit_mer():
    rep = score("我去", "我们去吧")
    assert rep.counts["I"] == 2
    assert rep.mer == 1.0 and rep.cer_native == 0.0


def test_cross_language_substitution():
    ops = align(tokenize_mixed("我"), tokenize_mixed("ok"))
    assert [o.kind for o in ops] == [Op.S]


@hypothesis.given(tokens, tokens)
def test_alignment_is_optimal(ref, hyp):
    ops = align(ref, hyp)
    assert sum(o.kind is not Op.C for o in ops) == recursive_distance(tuple(ref), tuple(hyp))
    assert [o.ref_token for o in ops if o.ref_token] == ref
    assert [o.hyp_token for o in ops if o.hyp_token] == hyp
    for o in ops:
        if o.kind in (Op.C, Op.S):
            assert o.ref_token and o.hyp_token and (o.kind is Op.C) == (o.ref_token == o.hyp_token)
        elif o.kind is Op.I:
            assert o.ref_token is None and o.hyp_token
        else:
            assert o.hyp_token is None and o.ref_token


@hypothesis.given(tokens.filter(bool), tokens)
def test_mer_bounds_language_contributions(ref, hyp):
    rep = score(ref, hyp)
    native_err = rep.n_native - rep.correct_native
    foreign_err = rep.n_foreign - rep.correct_foreign
    assert rep.mer >= max(native_err, foreign_err) / rep.n_ref
    assert 0 <= rep.cer_native <= 1 and 0 <= rep.wer_foreign <= 1


def test_corpus_pools_counts():
    pairs = [(WORKED_REF, WORKED_HYP), ("我去office", "我去office吧")]
    total = score_corpus(pairs)
    a, b = score(*pairs[0]), score(*pairs[1])
    assert total.counts == {k: a.counts[k] + b.counts[k] for k in a.counts}
    assert total.mer == (a.errors + b.errors) / (a.n_ref + b.n_ref)


def test_format_alignment():
    text = format_alignment(align(tokenize_mixed(WORKED_REF), tokenize_mixed(WORKED_HYP)))
    ref, hyp, ops = text.splitlines()
    assert ops.split() == ["C", "C", "C", "S", "C", "C", "D", "C"]
    assert "office" in ref and "opus" in hyp and "*" in hyp


def test_arr_examples():
    b = parse_buckets("1,10,20")
    assert b == [(1, 10), (10, 20), (20, math.inf)]
    rep = arr({"a": (3, 3, 12)}, b)
    assert rep.values() == [None, 1.0, None]
    assert [x.n_words for x in rep.buckets] == [0, 1, 0]
    assert arr({"a": (0, 2, 5), "b": (4, 4, 9)}, b).values()[0] == 0.5
    assert rep.to_json()[2]["bucket"] == "[20,inf)"


@pytest.mark.parametrize("counts", [(3, 2, 5), (0, 0, 5), (-1, 2, 5)])
def test_arr_invalid(counts):
    with pytest.raises(InvalidCounts):
        arr({"w": counts}, parse_buckets("1"))


@pytest.mark.parametrize("text", ["", "10,1", "1,1"])
def test_bad_buckets(text):
    with pytest.raises(ValueError):
        parse_buckets(text)


@hypothesis.given(st.dictionaries(st.text("abc", min_size=1, max_size=3), st.tuples(st.integers(1, 9), st.integers(1, 40)), min_size=1))
def test_arr_all_correct_is_one(words):
    rep = arr({w: (t, t, k) for w, (t, k) in words.items()}, parse_buckets("1,10,20"))
    assert all(v in (None, 1.0) for v in rep.values())
    assert sum(b.n_words for b in rep.buckets) == len(words)

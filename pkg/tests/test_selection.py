import pytest

from cslex.ape import OraclePosteriors, PosteriorRecord, RecordPosteriors, ape_table, select_top, two_pass_prune
from cslex.selection import SelectionConfig, SelectionMethod, ape_merge, select_lexicon, select_word
from cslex.simulate import collect_candidates


@pytest.mark.parametrize("text,expected", [("APE", SelectionMethod.APE), ("pcn", SelectionMethod.PCN),
                                           ("PCN+APE", SelectionMethod.PCN_PLUS_APE),
                                           ("pcn_plus_ape", SelectionMethod.PCN_PLUS_APE)])
def test_method_parse(text, expected):
    assert SelectionMethod.parse(text) is expected


def test_method_parse_rejects_unknown():
    with pytest.raises(ValueError):
        SelectionMethod.parse("rover")


def test_config_validation():
    with pytest.raises(ValueError):
        SelectionConfig(n_out=0)


def test_ape_selection_is_pruned_ranking(noisy_corpus):
    c = noisy_corpus
    src = OraclePosteriors(c)
    for w in c.words()[:10]:
        cs = collect_candidates(w, c, 10)
        got = select_word(cs, src, SelectionConfig(keep=5, n_out=3))
        assert got == list(two_pass_prune(cs, src, 5).candidates[:3])


@pytest.mark.parametrize("method", list(SelectionMethod))
def test_output_size_and_sources(noisy_corpus, method):
    c = noisy_corpus
    lex = select_lexicon(c, c.words()[:12], OraclePosteriors(c), SelectionConfig(method, n_out=4))
    assert lex.words() == sorted(c.words()[:12])
    for w in lex.words():
        assert 1 <= len(lex[w]) <= 4


@pytest.mark.parametrize("method", list(SelectionMethod))
def test_noiseless_recovery(noiseless_corpus, method):
    c = noiseless_corpus
    lex = select_lexicon(c, c.words(), OraclePosteriors(c), SelectionConfig(method))
    assert all(c.hidden_lexicon[w][0] in lex[w] for w in c.words())


def test_ape_merge_prefers_first_source_on_ties():
    recs = [PosteriorRecord("w", p, "u", 0.25) for p in [("a",), ("b",), ("c",), ("d",)]]
    src = RecordPosteriors(recs)
    assert ape_merge("w", [("d",), ("c",)], [("a",), ("b",)], src, 3) == [("c",), ("d",), ("a",)]


def test_ape_merge_orders_by_gamma():
    recs = [PosteriorRecord("w", ("a",), "u", 0.7), PosteriorRecord("w", ("b",), "u", 0.3)]
    src = RecordPosteriors(recs)
    assert ape_merge("w", [("b",)], [("a",)], src, 2) == [("a",), ("b",)]
    assert ape_merge("w", [("b",)], [("a",), ("b",)], src, 4) == select_top(ape_table("w", [("a",), ("b",)], src), 4)

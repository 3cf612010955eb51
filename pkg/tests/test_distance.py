import hypothesis
import hypothesis.strategies as st
import numpy as np

from cslex.distance import distance_matrix, edit_distance

seqs = st.lists(st.sampled_from(["a1", "a2", "b", "iao1", "x"]), max_size=8)


def _dp(a, b):
    d = [[i + j if i * j == 0 else 0 for j in range(len(b) + 1)] for i in range(len(a) + 1)]
    for i in range(1, len(a) + 1):
        for j in range(1, len(b) + 1):
            d[i][j] = min(d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] != b[j - 1]))
    return d[-1][-1]


@hypothesis.given(seqs, seqs)
def test_matches_textbook_dp(a, b):
    assert edit_distance(a, b) == _dp(a, b)


def test_multichar_symbols_are_atomic():
    # "a1" vs "a2" is one substitution, not a character-level edit
    assert edit_distance(["a1", "b"], ["a2", "b"]) == 1
    assert edit_distance(["iao1"], ["i", "ao1"]) == 2


@hypothesis.given(st.lists(seqs, min_size=1, max_size=4), st.lists(seqs, min_size=1, max_size=4))
def test_matrix_agrees_with_pairwise(rows, cols):
    m = distance_matrix(rows, cols)
    assert m.shape == (len(rows), len(cols))
    assert np.array_equal(m, [[_dp(r, c) for c in cols] for r in rows])


def test_empty_matrix_shape():
    assert distance_matrix([], [("a",)]).shape == (0, 1)

import os

import hypothesis
import pytest

from cslex.simulate import NoiseModel, generate_corpus

hypothesis.settings.register_profile("default", max_examples=100, deadline=None)
hypothesis.settings.register_profile("ci", max_examples=300, deadline=None)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

HEALTH = [
    "h ai2 ii iu5 x i3",
    "h ai2 ii iu5",
    "h ai2 ii iao1 x i2",
    "h ai2 ii iao4",
    "h ai2 ii iao1 x i4",
    "h ai2 ii iao1 x i1",
    "h ai2 ii iao1 x i3",
    "h ai2 ii iao2 s iy3",
    "h ai2 ii iao3 s iy3",
    "h ai2 ii iao4 s iy3",
]
HEALTH_BEST4 = {
    "h ai2 ii iao1 x iy3",
    "h ai2 ii iao1 x i3",
    "h ai2 ii iao1 s iy3",
    "h ai2 ii iao1 x i1",
}

# 7 native characters and one foreign word; the foreign word is misrecognised
# and one character is dropped.
WORKED_REF = "我想去office开会了吧"
WORKED_HYP = "我想去opus开会吧"


@pytest.fixture
def health():
    return [tuple(c.split()) for c in HEALTH]


@pytest.fixture(scope="session")
def noiseless_corpus():
    return generate_corpus(60, "zipf:s=1.1,max=40", NoiseModel(), seed=11)


@pytest.fixture(scope="session")
def noisy_corpus():
    return generate_corpus(60, "zipf:s=1.1,max=40", NoiseModel(0.15, 0.05, 0.05), seed=5)


_acceptance_lines = []


def record_acceptance(line):
    _acceptance_lines.append(line)


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)


def rule_lexicon(n_words, seed=0, min_len=4, max_len=8):
    """A consistent synthetic lexicon: every word spelled out by one set of letter rules."""
    import numpy as np

    from cslex.simulate import LetterRules, random_word
    from cslex.types import Lexicon, default_native_inventory

    rng = np.random.default_rng(seed)
    rules = LetterRules.random(default_native_inventory(), rng)
    lex = Lexicon()
    while len(lex) < n_words:
        w = random_word(rng, min_len, max_len)
        if w not in lex:
            lex.add(w, rules.pronounce(w))
    return lex

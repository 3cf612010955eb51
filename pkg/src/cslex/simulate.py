"""Synthetic code-switching corpus and phonetic decoder.

There is no acoustic model here.  A hidden ground-truth lexicon maps every
foreign word to native phonemes through letter rules; each audio segment is
a noise-perturbed copy of that pronunciation (the speaker's accent), and the
"decoder" returns the realised phone string together with its nearest edit
neighbours.  That keeps the properties the selection methods rely on
(candidates are plentiful and noisy) while leaving a known answer to score
against.
"""

from __future__ import annotations

import heapq
import json
import os
import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np

from cslex.errors import InvalidDistribution, NoSegments, UnknownSegment
from cslex.types import (
    Lexicon,
    PhonemeInventory,
    Segment,
    Utterance,
    default_native_inventory,
    is_foreign_token,
    read_lexicon,
    write_lexicon,
)

NATIVE_FILLER = (
    "的一是不了人我在有他这中大来上个国到说们为子和你地出道也时年得就那要下以生会"
    "自着去之过家学对可她里后小么心多天而能好都然没日于起还发成事只作当想看文无开手"
)


# ---------------------------------------------------------------------------
# volume laws


@dataclass(frozen=True)
class VolumeLaw:
    """Distribution of per-word driving volumes over ``1..k_max``.

    Written as ``"zipf:s=1.1,max=200"``, ``"uniform:lo=1,hi=40"`` or
    ``"const:k=5"``.
    """

    kind: str
    params: tuple

    @classmethod
    def parse(cls, text: str) -> "VolumeLaw":
        m = re.fullmatch(r"\s*(\w+)\s*(?::(.*))?", text or "")
        if not m:
            raise InvalidDistribution(f"cannot parse volume law {text!r}")
        kind = m.group(1).lower()
        params = {}
        for item in filter(None, (m.group(2) or "").split(",")):
            if "=" not in item:
                raise InvalidDistribution(f"bad parameter {item!r} in {text!r}")
            k, v = item.split("=", 1)
            try:
                params[k.strip()] = float(v)
            except ValueError:
                raise InvalidDistribution(f"bad value {v!r} in {text!r}") from None
        law = cls(kind, tuple(sorted(params.items())))
        law.pmf()  # validates
        return law

    def __str__(self):
        inner = ",".join(f"{k}={v:g}" for k, v in self.params)
        return f"{self.kind}:{inner}" if inner else self.kind

    def _p(self, name, default=None):
        value = dict(self.params).get(name, default)
        if value is None:
            raise InvalidDistribution(f"{self.kind} law needs parameter {name!r}")
        return value

    def support(self) -> np.ndarray:
        if self.kind == "zipf":
            k_max = int(self._p("max", 200))
            lo = 1
        elif self.kind == "uniform":
            lo, k_max = int(self._p("lo")), int(self._p("hi"))
        elif self.kind == "const":
            lo = k_max = int(self._p("k"))
        else:
            raise InvalidDistribution(f"unknown volume law {self.kind!r}")
        if lo < 1 or k_max < lo:
            raise InvalidDistribution(f"volume law {self} must have support within k >= 1")
        return np.arange(lo, k_max + 1)

    def pmf(self) -> np.ndarray:
        ks = self.support()
        if self.kind == "zipf":
            s = self._p("s", 1.1)
            if not s > 0:
                raise InvalidDistribution("zipf exponent must be positive")
            w = ks.astype(float) ** -s
        else:
            w = np.ones(len(ks))
        return w / w.sum()

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.choice(self.support(), size=size, p=self.pmf())


# ---------------------------------------------------------------------------
# noise and letter rules


@dataclass(frozen=True)
class NoiseModel:
    """Per-phone accent noise.

    Each phone is independently deleted, substituted, or followed by an
    inserted phone.  Substitutes come from ``confusion`` when the phone has an
    entry there, otherwise uniformly from the inventory.
    """

    p_sub: float = 0.0
    p_ins: float = 0.0
    p_del: float = 0.0
    confusion: Mapping[str, Mapping[str, float]] = field(default_factory=dict)
    rng_seed: int = 0

    def __post_init__(self):
        for name in ("p_sub", "p_ins", "p_del"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InvalidDistribution(f"{name}={v} outside [0, 1]")
        if self.p_sub + self.p_ins + self.p_del > 1.0 + 1e-12:
            raise InvalidDistribution("p_sub + p_ins + p_del must not exceed 1")

    @property
    def is_zero(self) -> bool:
        return self.p_sub == self.p_ins == self.p_del == 0.0

    def perturb(self, pron: Sequence[str], inventory: PhonemeInventory,
                rng: np.random.Generator) -> tuple[str, ...]:
        if self.is_zero:
            return tuple(pron)
        symbols = inventory.symbols
        out = []
        for ph in pron:
            u = rng.random()
            if u < self.p_del:
                continue
            if u < self.p_del + self.p_sub:
                out.append(self._substitute(ph, symbols, rng))
            elif u < self.p_del + self.p_sub + self.p_ins:
                out.append(ph)
                out.append(symbols[rng.integers(len(symbols))])
            else:
                out.append(ph)
        if not out:
            out.append(pron[0])
        return tuple(out)

    def _substitute(self, ph, symbols, rng):
        targets = self.confusion.get(ph)
        if targets:
            names = sorted(targets)
            w = np.array([targets[n] for n in names], dtype=float)
            return names[rng.choice(len(names), p=w / w.sum())]
        while True:
            cand = symbols[rng.integers(len(symbols))]
            if cand != ph:
                return cand


def tone_confusion(inventory: PhonemeInventory) -> dict[str, dict[str, float]]:
    """Confuse toned finals with their other tones (``iao1`` <-> ``iao4``)."""
    groups: dict[str, list[str]] = {}
    for sym in inventory.symbols:
        if sym[-1].isdigit():
            groups.setdefault(sym[:-1], []).append(sym)
    return {s: {t: 1.0 for t in g if t != s} for g in groups.values() if len(g) > 1 for s in g}


DIGRAPHS = ("ch", "sh", "th", "ph", "ng")
LETTERS = "abcdefghijklmnopqrstuvwxyz"
VOWELS = "aeiouy"


@dataclass(frozen=True)
class LetterRules:
    """Deterministic grapheme-unit -> phoneme mapping (the hidden accent rules)."""

    mapping: Mapping[str, str]

    @classmethod
    def random(cls, inventory: PhonemeInventory, rng: np.random.Generator) -> "LetterRules":
        units = list(LETTERS) + list(DIGRAPHS)
        symbols = list(inventory.symbols)
        replace = len(symbols) < len(units)
        picks = rng.choice(len(symbols), size=len(units), replace=replace)
        return cls({u: symbols[i] for u, i in zip(units, picks)})

    def pronounce(self, word: str) -> tuple[str, ...]:
        out, i = [], 0
        while i < len(word):
            if word[i:i + 2] in self.mapping and len(word[i:i + 2]) == 2:
                out.append(self.mapping[word[i:i + 2]])
                i += 2
            else:
                out.append(self.mapping[word[i]])
                i += 1
        return tuple(out)


def random_word(rng, min_len, max_len):
    n = int(rng.integers(min_len, max_len + 1))
    consonants = [c for c in LETTERS if c not in VOWELS]
    start_vowel = rng.random() < 0.3
    chars = []
    for i in range(n):
        use_vowel = (i % 2 == 0) == start_vowel
        pool = VOWELS if use_vowel else consonants
        chars.append(pool[rng.integers(len(pool))])
    return "".join(chars)


# ---------------------------------------------------------------------------
# corpus


@dataclass
class SyntheticCorpus:
    utterances: list[Utterance]
    segments: dict[str, list[Segment]]
    realized: dict[Segment, tuple[str, ...]]
    hidden_lexicon: Lexicon | None
    inventory: PhonemeInventory
    heldout: list[Utterance] = field(default_factory=list)
    heldout_segments: dict[str, list[Segment]] = field(default_factory=dict)
    heldout_realized: dict[Segment, tuple[str, ...]] = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self._utt = {u.id: u for u in self.utterances}
        self._hosts = {w: sorted({s.utterance_id for s in segs}) for w, segs in self.segments.items()}

    def words(self) -> list[str]:
        return sorted(self.segments)

    def volume(self, word: str) -> int:
        return len(self.segments.get(word, ()))

    def volumes(self) -> dict[str, int]:
        return {w: len(s) for w, s in sorted(self.segments.items())}

    def host_utterances(self, word: str) -> list[str]:
        return list(self._hosts.get(word, ()))

    def utterance(self, utt_id: str) -> Utterance:
        return self._utt[utt_id]

    def occurrences(self, word: str, utt_id: str) -> list[tuple[str, ...]]:
        """Realised phones of every occurrence of ``word`` in ``utt_id``."""
        return [self.realized[s] for s in self.segments.get(word, ()) if s.utterance_id == utt_id]

    def without_hidden(self) -> "SyntheticCorpus":
        return SyntheticCorpus(self.utterances, self.segments, self.realized, None, self.inventory,
                               self.heldout, self.heldout_segments, self.heldout_realized, dict(self.meta))


def _build_utterances(occurrences, rng, prefix, p_multi):
    utterances, segments = [], {}
    i = 0
    while i < len(occurrences):
        take = 2 if (rng.random() < p_multi and i + 1 < len(occurrences)) else 1
        words = occurrences[i:i + take]
        i += take
        n_native = int(rng.integers(2, 9))
        tokens = [NATIVE_FILLER[j] for j in rng.integers(len(NATIVE_FILLER), size=n_native)]
        for w in words:
            tokens.insert(int(rng.integers(len(tokens) + 1)), w)
        utt = Utterance(f"{prefix}{len(utterances):06d}", tuple(tokens))
        utterances.append(utt)
        seen: dict[str, int] = {}
        for tok in utt.tokens:
            if is_foreign_token(tok):
                occ = seen.get(tok, 0)
                seen[tok] = occ + 1
                segments.setdefault(tok, []).append(Segment(tok, utt.id, occ))
    return utterances, segments


def generate_corpus(n_words: int, volume_law: VolumeLaw | str, noise: NoiseModel, seed: int,
                    inventory: PhonemeInventory | None = None, heldout_per_word: int = 5,
                    word_len: tuple[int, int] = (4, 8), p_multi: float = 0.1) -> SyntheticCorpus:
    """Sample words, hidden pronunciations, driving volumes and realisations.

    Pure function of its arguments.  Words are 4-8 letters by default (the
    experiments only keep foreign words longer than three letters).
    """
    if n_words < 1:
        raise InvalidDistribution("n_words must be >= 1")
    if isinstance(volume_law, str):
        volume_law = VolumeLaw.parse(volume_law)
    inventory = inventory or default_native_inventory()
    rng = np.random.default_rng(seed)
    rules = LetterRules.random(inventory, rng)

    words: list[str] = []
    seen = set()
    while len(words) < n_words:
        w = random_word(rng, *word_len)
        if w not in seen:
            seen.add(w)
            words.append(w)
    hidden = Lexicon({w: [rules.pronounce(w)] for w in words})
    volumes = volume_law.sample(rng, n_words)

    occ = [w for w, k in zip(words, volumes) for _ in range(int(k))]
    occ = [occ[j] for j in rng.permutation(len(occ))]
    utterances, segments = _build_utterances(occ, rng, "utt", p_multi)

    test_occ = [w for w in words for _ in range(heldout_per_word)]
    test_occ = [test_occ[j] for j in rng.permutation(len(test_occ))]
    heldout, heldout_segments = _build_utterances(test_occ, rng, "test", p_multi)

    noise_rng = np.random.default_rng([seed, noise.rng_seed])
    realized = {}
    for w in sorted(segments):
        for s in segments[w]:
            realized[s] = noise.perturb(hidden[w][0], inventory, noise_rng)
    heldout_realized = {}
    for w in sorted(heldout_segments):
        for s in heldout_segments[w]:
            heldout_realized[s] = noise.perturb(hidden[w][0], inventory, noise_rng)

    meta = {
        "n_words": n_words,
        "volume_law": str(volume_law),
        "noise": {"p_sub": noise.p_sub, "p_ins": noise.p_ins, "p_del": noise.p_del,
                  "rng_seed": noise.rng_seed},
        "seed": seed,
        "heldout_per_word": heldout_per_word,
        "rules": dict(sorted(rules.mapping.items())),
    }
    return SyntheticCorpus(utterances, segments, realized, hidden, inventory,
                           heldout, heldout_segments, heldout_realized, meta)


# ---------------------------------------------------------------------------
# decoding


def _neighbours(seq: tuple, symbols: tuple) -> set:
    out = set()
    n = len(seq)
    for i in range(n):
        if n > 1:
            out.add(seq[:i] + seq[i + 1:])
        head, tail = seq[:i], seq[i + 1:]
        for s in symbols:
            if s != seq[i]:
                out.add(head + (s,) + tail)
    for i in range(n + 1):
        head, tail = seq[:i], seq[i:]
        for s in symbols:
            out.add(head + (s,) + tail)
    out.discard(seq)
    return out


def _fill(head, tail, symbols, skip=None):
    for s in symbols:
        if s != skip:
            yield head + (s,) + tail


def _sorted_neighbour_streams(seq: tuple, symbols: tuple):
    n = len(seq)
    for i in range(n):
        head, tail = seq[:i], seq[i + 1:]
        if n > 1:
            yield iter((head + tail,))
        yield _fill(head, tail, symbols, skip=seq[i])
    for i in range(n + 1):
        yield _fill(seq[:i], seq[i:], symbols)


@lru_cache(maxsize=1 << 16)
def _nbest(realized: tuple, symbols: tuple, n: int) -> tuple:
    out = [realized]
    if n == 1:
        return tuple(out)
    # each stream is already sorted, so a lazy merge yields the 1-edit
    # neighbourhood in lexicographic order without materialising it
    for cand in heapq.merge(*_sorted_neighbour_streams(realized, tuple(sorted(symbols)))):
        if cand != out[-1]:
            out.append(cand)
            if len(out) == n:
                return tuple(out)
    d1 = set(out[1:])
    d2 = set()
    for x in d1:
        d2 |= _neighbours(x, symbols)
    d2 -= d1
    d2.discard(realized)
    return tuple(out + heapq.nsmallest(n - len(out), d2))


def edit_neighbourhood(realized: Sequence[str], inventory: PhonemeInventory, n: int) -> list[tuple[str, ...]]:
    """``n`` closest strings to ``realized`` within two edits (ties lexicographic)."""
    return list(_nbest(tuple(realized), inventory.symbols, n))


def decode_segment(s: Segment, corpus: SyntheticCorpus, n: int = 10, lam: float = 1.0,
                   with_scores: bool = False):
    """n-best phonetic decode of one segment.

    Candidates are ranked by ``-lam * editdist(candidate, realised)``; the
    realised string itself always comes first.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    try:
        realized = corpus.realized[s]
    except KeyError:
        raise UnknownSegment(f"segment {s} not in corpus") from None
    nbest = edit_neighbourhood(realized, corpus.inventory, n)
    if not with_scores:
        return nbest
    from cslex.distance import edit_distance

    return [(p, -lam * edit_distance(p, realized)) for p in nbest]


@dataclass(frozen=True)
class CandidateSet:
    """The union of n-best decodes over a word's segments, with provenance."""

    word: str
    candidates: tuple[tuple[str, ...], ...]
    provenance: Mapping[tuple[str, ...], frozenset]

    def __len__(self):
        return len(self.candidates)

    def __iter__(self):
        return iter(self.candidates)

    def __contains__(self, pron):
        return tuple(pron) in self.provenance

    def restricted(self, prons: Sequence[Sequence[str]]) -> "CandidateSet":
        prons = [tuple(p) for p in prons]
        return CandidateSet(self.word, tuple(prons),
                            {p: self.provenance.get(p, frozenset()) for p in prons})


def collect_candidates(word: str, corpus: SyntheticCorpus, n: int = 10) -> CandidateSet:
    segs = corpus.segments.get(word)
    if not segs:
        raise NoSegments(word)
    prov: dict[tuple, set] = {}
    for s in segs:
        for p in decode_segment(s, corpus, n):
            prov.setdefault(p, set()).add(s)
    return CandidateSet(word, tuple(prov), {p: frozenset(v) for p, v in prov.items()})


# ---------------------------------------------------------------------------
# persistence


def _write_jsonl(path, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")


def _read_jsonl(path):
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def _seg_rows(segments, realized):
    for w in sorted(segments):
        for s in segments[w]:
            yield {"word": s.word, "utt": s.utterance_id, "occ": s.occurrence_index,
                   "realized": " ".join(realized[s])}


def save_corpus(corpus: SyntheticCorpus, out_dir) -> list[str]:
    """Write the corpus files; returns the paths written."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "utterances": os.path.join(out_dir, "utterances.jsonl"),
        "segments": os.path.join(out_dir, "segments.jsonl"),
        "heldout": os.path.join(out_dir, "heldout.jsonl"),
        "heldout_segments": os.path.join(out_dir, "heldout_segments.jsonl"),
        "inventory": os.path.join(out_dir, "inventory.txt"),
        "meta": os.path.join(out_dir, "corpus.json"),
    }
    _write_jsonl(paths["utterances"], ({"id": u.id, "tokens": list(u.tokens)} for u in corpus.utterances))
    _write_jsonl(paths["segments"], _seg_rows(corpus.segments, corpus.realized))
    _write_jsonl(paths["heldout"], ({"id": u.id, "tokens": list(u.tokens)} for u in corpus.heldout))
    _write_jsonl(paths["heldout_segments"], _seg_rows(corpus.heldout_segments, corpus.heldout_realized))
    with open(paths["inventory"], "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(corpus.inventory.symbols) + "\n")
    with open(paths["meta"], "w", encoding="utf-8", newline="\n") as fh:
        json.dump(corpus.meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    out = list(paths.values())
    if corpus.hidden_lexicon is not None:
        hidden = os.path.join(out_dir, "hidden.groundtruth.tsv")
        write_lexicon(corpus.hidden_lexicon, hidden)
        out.append(hidden)
    return out


def _load_segments(rows):
    segments, realized = {}, {}
    for r in rows:
        s = Segment(r["word"], r["utt"], int(r["occ"]))
        segments.setdefault(s.word, []).append(s)
        realized[s] = tuple(r["realized"].split())
    return segments, realized


def load_corpus(in_dir, with_hidden: bool = False) -> SyntheticCorpus:
    """Read a corpus directory.  The ground-truth lexicon is only loaded on request."""
    with open(os.path.join(in_dir, "inventory.txt"), encoding="utf-8") as fh:
        inventory = PhonemeInventory.from_symbols("native", fh.read().split())
    utts = [Utterance(r["id"], tuple(r["tokens"])) for r in _read_jsonl(os.path.join(in_dir, "utterances.jsonl"))]
    segments, realized = _load_segments(_read_jsonl(os.path.join(in_dir, "segments.jsonl")))
    heldout, h_segments, h_realized = [], {}, {}
    if os.path.exists(os.path.join(in_dir, "heldout.jsonl")):
        heldout = [Utterance(r["id"], tuple(r["tokens"]))
                   for r in _read_jsonl(os.path.join(in_dir, "heldout.jsonl"))]
        h_segments, h_realized = _load_segments(_read_jsonl(os.path.join(in_dir, "heldout_segments.jsonl")))
    meta = {}
    if os.path.exists(os.path.join(in_dir, "corpus.json")):
        with open(os.path.join(in_dir, "corpus.json"), encoding="utf-8") as fh:
            meta = json.load(fh)
    hidden = None
    if with_hidden:
        hidden = read_lexicon(os.path.join(in_dir, "hidden.groundtruth.tsv"), inventory)
    return SyntheticCorpus(utts, segments, realized, hidden, inventory, heldout, h_segments, h_realized, meta)

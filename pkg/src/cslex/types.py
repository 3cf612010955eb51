"""Domain vocabulary: phonemes, inventories, words, utterances, lexicons.

Pronunciations are plain tuples of phoneme symbols.  Symbols are opaque:
``"ai2"`` and ``"ai4"`` are unrelated phonemes as far as this package cares.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

from cslex.errors import MalformedLine, UnknownPhoneme

Pronunciation = tuple  # tuple[str, ...], length >= 1


class Lang(str, enum.Enum):
    NATIVE = "native"
    FOREIGN = "foreign"


@dataclass(frozen=True, order=True)
class Phoneme:
    symbol: str
    language: Lang = Lang.NATIVE

    def __post_init__(self):
        if not self.symbol or any(ch.isspace() for ch in self.symbol):
            raise ValueError(f"bad phoneme symbol {self.symbol!r}")


@dataclass(frozen=True)
class PhonemeInventory:
    name: str
    phonemes: tuple[Phoneme, ...]

    def __post_init__(self):
        if not self.phonemes:
            raise ValueError("inventory must be nonempty")
        symbols = [p.symbol for p in self.phonemes]
        if len(set(symbols)) != len(symbols):
            raise ValueError("duplicate phoneme symbols in inventory")
        object.__setattr__(self, "_index", frozenset(symbols))

    @classmethod
    def from_symbols(cls, name: str, symbols: Iterable[str], language: Lang = Lang.NATIVE):
        return cls(name, tuple(Phoneme(s, language) for s in symbols))

    @property
    def symbols(self) -> tuple[str, ...]:
        return tuple(p.symbol for p in self.phonemes)

    def __contains__(self, symbol) -> bool:
        return symbol in self._index

    def __len__(self) -> int:
        return len(self.phonemes)

    def __iter__(self):
        return iter(self.symbols)


# Toy Mandarin-like native inventory.  Large enough to hold every symbol in
# the "health" decode list, small enough to keep edit neighbourhoods cheap.
NATIVE_INITIALS = (
    "b", "p", "m", "f", "d", "t", "n", "l", "g", "k", "h", "j", "q", "x",
    "zh", "ch", "sh", "r", "z", "c", "s", "y", "w",
)
NATIVE_FINALS = ("a", "ai", "ao", "e", "ei", "i", "ia", "iao", "iu", "iy", "o", "ou", "u", "uo")
NATIVE_TONES = ("1", "2", "3", "4", "5")


def default_native_inventory() -> PhonemeInventory:
    symbols = list(NATIVE_INITIALS) + ["ii"]
    symbols += [f + t for f in NATIVE_FINALS for t in NATIVE_TONES]
    return PhonemeInventory.from_symbols("native", symbols, Lang.NATIVE)


@dataclass(frozen=True, order=True)
class Word:
    grapheme: str
    language: Lang = Lang.FOREIGN

    def __post_init__(self):
        if not self.grapheme:
            raise ValueError("empty grapheme")


@dataclass(frozen=True)
class Utterance:
    id: str
    tokens: tuple[str, ...]

    def foreign_tokens(self) -> list[str]:
        return [t for t in self.tokens if is_foreign_token(t)]

    def count(self, word: str) -> int:
        return sum(1 for t in self.tokens if t == word)


def is_foreign_token(token: str) -> bool:
    return token.isascii() and token.isalpha()


@dataclass(frozen=True, order=True)
class Segment:
    word: str
    utterance_id: str
    occurrence_index: int = 0


class Lexicon:
    """Word -> ordered, duplicate-free list of pronunciations.

    Iteration is sorted by grapheme; within a word the insertion order is
    kept because downstream selection is rank sensitive.
    """

    def __init__(self, entries: Mapping[str, Iterable[Sequence[str]]] | None = None):
        self._entries: dict[str, list[tuple[str, ...]]] = {}
        for word, prons in (entries or {}).items():
            for pron in prons:
                self.add(word, pron)

    def add(self, word: str, pron: Sequence[str]) -> bool:
        pron = tuple(pron)
        if not pron:
            raise ValueError(f"empty pronunciation for {word!r}")
        prons = self._entries.setdefault(word, [])
        if pron in prons:
            return False
        prons.append(pron)
        return True

    def words(self) -> list[str]:
        return sorted(self._entries)

    def __getitem__(self, word: str) -> list[tuple[str, ...]]:
        return list(self._entries[word])

    def get(self, word: str, default=None):
        if word in self._entries:
            return list(self._entries[word])
        return default

    def __contains__(self, word) -> bool:
        return word in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[str]:
        return iter(self.words())

    def items(self):
        for w in self.words():
            yield w, list(self._entries[w])

    def pairs(self):
        for w in self.words():
            for p in self._entries[w]:
                yield w, p

    def __eq__(self, other) -> bool:
        if not isinstance(other, Lexicon):
            return NotImplemented
        return self._entries == other._entries

    def set_equal(self, other: "Lexicon") -> bool:
        """Order-insensitive comparison of the word -> {pronunciations} maps."""
        if set(self._entries) != set(other._entries):
            return False
        return all(set(self._entries[w]) == set(other._entries[w]) for w in self._entries)

    def restricted(self, words: Iterable[str]) -> "Lexicon":
        keep = set(words)
        return Lexicon({w: p for w, p in self._entries.items() if w in keep})

    def merged(self, other: "Lexicon") -> "Lexicon":
        out = Lexicon(self._entries)
        for w, p in other.pairs():
            out.add(w, p)
        return out

    def num_entries(self) -> int:
        return sum(len(p) for p in self._entries.values())

    def __repr__(self) -> str:
        return f"Lexicon({len(self)} words, {self.num_entries()} entries)"


def parse_lexicon(text: str, inventory: PhonemeInventory | None = None) -> Lexicon:
    """Parse ``grapheme<TAB>phone phone ...`` lines.

    Blank lines and ``#`` comments are skipped.  With an ``inventory`` every
    phone must belong to it.
    """
    lex = Lexicon()
    for line_no, raw in enumerate(text.split("\n"), start=1):
        line = raw.rstrip("\r")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise MalformedLine(line_no, line)
        word, phones = parts[0].strip(), parts[1].split()
        if not word or not phones:
            raise MalformedLine(line_no, line)
        if inventory is not None:
            for ph in phones:
                if ph not in inventory:
                    raise UnknownPhoneme(ph, line_no)
        lex.add(word, phones)
    return lex


def serialize_lexicon(lex: Lexicon) -> str:
    return "".join(f"{w}\t{' '.join(p)}\n" for w, p in lex.pairs())


def read_lexicon(path, inventory: PhonemeInventory | None = None) -> Lexicon:
    with open(path, encoding="utf-8") as fh:
        return parse_lexicon(fh.read(), inventory)


def write_lexicon(lex: Lexicon, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize_lexicon(lex))


def driving_volume(word: str, segments: Iterable[Segment]) -> int:
    """Number of audio segments available for ``word`` (its driving volume k)."""
    return sum(1 for s in segments if s.word == word)


def host_utterance_count(word: str, segments: Iterable[Segment]) -> int:
    """M_w: how many distinct utterances contain ``word``."""
    return len({s.utterance_id for s in segments if s.word == word})

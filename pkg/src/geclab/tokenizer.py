"""Deterministic character- and word-level segmentation with source offsets.

All offsets produced by this module refer to the NFC-normalized form of the
input string.  Whitespace never enters a token; it survives as the gap
between neighbouring token offsets, so the normalized input can always be
reconstructed from the tokens plus the text between them.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from typing import Iterable

GRANULARITIES = ("char", "word")

# CJK ideograph blocks: unified base, extension A, compatibility ideographs,
# and the astral extensions B..F as one contiguous span.
_CJK_RANGES = (
    (0x4E00, 0x9FFF),
    (0x3400, 0x4DBF),
    (0xF900, 0xFAFF),
    (0x20000, 0x2EBEF),
)


def nfc(text: str) -> str:
    """NFC-normalize a string."""
    return unicodedata.normalize("NFC", text)


def normalize_text(text: str) -> str:
    """Canonical form used for deduplication and exact-match comparisons."""
    return nfc(text).strip()


def is_cjk(ch: str) -> bool:
    """True for CJK ideographs (tokenized one character at a time)."""
    cp = ord(ch)
    return any(lo <= cp <= hi for lo, hi in _CJK_RANGES)


@dataclass(frozen=True)
class Token:
    """A segment [char_beg, char_end) of the NFC-normalized source string."""

    text: str
    char_beg: int
    char_end: int


@dataclass(frozen=True)
class Lexicon:
    """Word list for maximum matching; max_len is the longest entry in chars."""

    entries: frozenset[str]
    max_len: int

    @classmethod
    def from_words(cls, words: Iterable[str]) -> "Lexicon":
        entries = frozenset(w for w in words if w)
        return cls(entries, max((len(w) for w in entries), default=0))


EMPTY_LEXICON = Lexicon.from_words(())


def load_lexicon(path) -> Lexicon:
    """Read a lexicon file: one UTF-8 word per line, '#' lines are comments."""
    words = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            word = line.strip()
            if word and not word.startswith("#"):
                words.append(word)
    return Lexicon.from_words(words)


def char_tokenize(text: str) -> list[Token]:
    """Split into character-level units.

    Each CJK ideograph and each punctuation mark is its own token; maximal
    runs of other letters and digits (e.g. "LSTM", "2024") form one token.
    """
    text = nfc(text)
    tokens: list[Token] = []
    run_beg = -1
    for i, ch in enumerate(text):
        if ch.isspace():
            if run_beg >= 0:
                tokens.append(Token(text[run_beg:i], run_beg, i))
                run_beg = -1
        elif is_cjk(ch) or not ch.isalnum():
            if run_beg >= 0:
                tokens.append(Token(text[run_beg:i], run_beg, i))
                run_beg = -1
            tokens.append(Token(ch, i, i + 1))
        elif run_beg < 0:
            run_beg = i
    if run_beg >= 0:
        tokens.append(Token(text[run_beg:], run_beg, len(text)))
    return tokens


def word_tokenize(text: str, lexicon: Lexicon) -> list[Token]:
    """Forward maximum matching against the lexicon.

    A match must start and end on char_tokenize unit boundaries and may not
    span whitespace.  Positions without a match fall back to the single
    char-level unit, so an empty lexicon reproduces char_tokenize exactly.
    """
    text = nfc(text)
    units = char_tokenize(text)
    if not lexicon.entries:
        return units
    tokens: list[Token] = []
    i = 0
    n = len(units)
    while i < n:
        beg = units[i].char_beg
        best_j = -1
        j = i
        prev_end = beg
        while j < n and units[j].char_beg == prev_end:
            prev_end = units[j].char_end
            if prev_end - beg > lexicon.max_len:
                break
            if j > i and text[beg:prev_end] in lexicon.entries:
                best_j = j
            j += 1
        if best_j < 0:
            tokens.append(units[i])
            i += 1
        else:
            end = units[best_j].char_end
            tokens.append(Token(text[beg:end], beg, end))
            i = best_j + 1
    return tokens


def tokenize(text: str, granularity: str = "char", lexicon: Lexicon | None = None) -> list[Token]:
    """Dispatch to char_tokenize or word_tokenize."""
    if granularity == "char":
        return char_tokenize(text)
    if granularity == "word":
        if lexicon is None:
            raise ValueError("word granularity requires a lexicon")
        return word_tokenize(text, lexicon)
    raise ValueError(f"unknown granularity {granularity!r}, expected one of {GRANULARITIES}")

"""Rule-based corruption of clean sentences into (noisy, clean) training pairs."""

from __future__ import annotations

import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .tokenizer import EMPTY_LEXICON, Lexicon, nfc, tokenize

_MASK64 = (1 << 64) - 1

OP_NAMES = ("replace", "insert", "delete", "swap")


def derive_line_seed(seed: int, index: int) -> int:
    """splitmix64 of (seed, line index).

    Every corpus line gets its own generator, so output is independent of
    processing order and worker count.
    """
    x = (seed + (index + 1) * 0x9E3779B97F4A7C15) & _MASK64
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) & _MASK64
    x ^= x >> 27
    x = (x * 0x94D049BB133111EB) & _MASK64
    x ^= x >> 31
    return x


@dataclass(frozen=True)
class CorruptionConfig:
    token_prob: float = 0.05
    replace_weight: float = 0.55
    insert_weight: float = 0.2
    delete_weight: float = 0.2
    swap_weight: float = 0.05
    replace_confusion_prob: float = 0.5
    insert_same_prob: float = 0.5
    word_granularity_prob: float = 0.5
    seed: int = 0

    def __post_init__(self):
        for name in (
            "token_prob",
            "replace_confusion_prob",
            "insert_same_prob",
            "word_granularity_prob",
        ):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {value}")
        weights = (self.replace_weight, self.insert_weight, self.delete_weight, self.swap_weight)
        if any(w < 0 for w in weights):
            raise ValueError("operation weights must be non-negative")
        if abs(sum(weights) - 1.0) > 1e-9:
            raise ValueError(f"operation weights sum to {sum(weights)}, expected 1")
        if not 0 <= self.seed <= _MASK64:
            raise ValueError("seed must fit in 64 bits")


@dataclass
class ConfusionSets:
    """Replacement candidates: char- and word-keyed maps plus a fallback vocab."""

    char_map: dict[str, list[str]]
    word_map: dict[str, list[str]]
    vocab: list[str]

    def __post_init__(self):
        if not self.vocab:
            raise ValueError("vocab must not be empty")
        for label, mapping in (("char_map", self.char_map), ("word_map", self.word_map)):
            for key, alts in mapping.items():
                if not key or not alts:
                    raise ValueError(f"{label} entry {key!r} has no alternatives")


@dataclass
class CorruptionTrace:
    """Per-sentence counters for auditing corruption statistics."""

    n_tokens: int = 0
    n_selected: int = 0
    replaced: int = 0
    inserted: int = 0
    deleted: int = 0
    swapped: int = 0


@dataclass
class CorruptedPair:
    noisy: str
    clean: str
    changed: bool
    trace: CorruptionTrace = field(default_factory=CorruptionTrace)


class ConfusionFileError(ValueError):
    pass


def _draw_op(rng: random.Random, cfg: CorruptionConfig) -> str:
    x = rng.random()
    if x < cfg.replace_weight:
        return "replace"
    x -= cfg.replace_weight
    if x < cfg.insert_weight:
        return "insert"
    x -= cfg.insert_weight
    if x < cfg.delete_weight:
        return "delete"
    return "swap"


def _replacement(
    rng: random.Random,
    cfg: CorruptionConfig,
    conf_map: dict[str, list[str]],
    vocab: Sequence[str],
    token: str,
) -> str:
    use_confusion = rng.random() < cfg.replace_confusion_prob
    alts = conf_map.get(token)
    if use_confusion and alts:
        return rng.choice(alts)
    # Tokens without a confusion entry fall back to the random-vocab branch.
    return rng.choice(vocab)


def corrupt_sentence(
    clean: str,
    cfg: CorruptionConfig,
    conf: ConfusionSets,
    lexicon: Lexicon | None = None,
    rng: random.Random | None = None,
) -> CorruptedPair:
    """Corrupt one sentence.

    Granularity is drawn once per sentence (word with probability
    cfg.word_granularity_prob, else char).  Each token is then selected
    independently with cfg.token_prob and hit with one weighted operation:

    * replace: a confusion-set alternative (cfg.replace_confusion_prob) or a
      uniform vocab token;
    * insert: a copy of the token (cfg.insert_same_prob) or a uniform vocab
      token, placed before the current token;
    * delete: drop the token;
    * swap: exchange the token with the one after it (skipped on the last
      token; the consumed neighbour is not corrupted again).
    """
    if rng is None:
        rng = random.Random(cfg.seed)
    text = nfc(clean)
    use_word = rng.random() < cfg.word_granularity_prob
    granularity = "word" if use_word else "char"
    tokens = tokenize(text, granularity, lexicon if lexicon is not None else EMPTY_LEXICON)
    conf_map = conf.word_map if use_word else conf.char_map

    # (gap before token, token text) cells; gaps keep surrounding whitespace.
    cells: list[tuple[str, str]] = []
    prev_end = 0
    for t in tokens:
        cells.append((text[prev_end : t.char_beg], t.text))
        prev_end = t.char_end
    trailing = text[prev_end:]

    trace = CorruptionTrace(n_tokens=len(tokens))
    out: list[tuple[str, str]] = []
    i = 0
    while i < len(cells):
        gap, tok = cells[i]
        if rng.random() >= cfg.token_prob:
            out.append((gap, tok))
            i += 1
            continue
        trace.n_selected += 1
        op = _draw_op(rng, cfg)
        if op == "replace":
            trace.replaced += 1
            out.append((gap, _replacement(rng, cfg, conf_map, conf.vocab, tok)))
        elif op == "insert":
            trace.inserted += 1
            new = tok if rng.random() < cfg.insert_same_prob else rng.choice(conf.vocab)
            out.append((gap, new))
            out.append(("", tok))
        elif op == "delete":
            trace.deleted += 1
        else:  # swap
            trace.swapped += 1
            if i + 1 < len(cells):
                next_gap, next_tok = cells[i + 1]
                out.append((gap, next_tok))
                out.append((next_gap, tok))
                i += 2
                continue
            out.append((gap, tok))  # no token after the last one; no effect
        i += 1

    noisy = "".join(g + t for g, t in out) + trailing
    return CorruptedPair(noisy=noisy, clean=clean, changed=noisy != text, trace=trace)


def corrupt_corpus(
    lines: Iterable[str],
    cfg: CorruptionConfig,
    conf: ConfusionSets,
    lexicon: Lexicon | None = None,
    jobs: int = 1,
) -> Iterator[CorruptedPair]:
    """Corrupt a stream of clean lines, one pair per line.

    Line i is corrupted under a generator seeded with
    derive_line_seed(cfg.seed, i), so results are byte-identical for any
    jobs value.  Unchanged lines are still emitted with changed=False.
    """

    def work(item: tuple[int, str]) -> CorruptedPair:
        idx, line = item
        rng = random.Random(derive_line_seed(cfg.seed, idx))
        return corrupt_sentence(line, cfg, conf, lexicon, rng)

    numbered = enumerate(lines)
    if jobs <= 1:
        for item in numbered:
            yield work(item)
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            yield from pool.map(work, numbered)


def read_confusion_file(path) -> dict[str, list[str]]:
    """Parse a TSV confusion file: key<TAB>alt1 alt2 ...

    Duplicate keys merge their alternative lists, preserving first-seen
    order and dropping repeats.  '#' lines are comments.
    """
    mapping: dict[str, list[str]] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, 1):
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0] or not parts[1].split():
                raise ConfusionFileError(
                    f"{path}: line {line_no}: expected 'key<TAB>alt1 alt2 ...'"
                )
            bucket = mapping.setdefault(parts[0], [])
            for alt in parts[1].split():
                if alt not in bucket:
                    bucket.append(alt)
    return mapping


def read_vocab_file(path) -> list[str]:
    """One token per line; blank lines and '#' comments are skipped."""
    vocab = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            token = line.strip()
            if token and not token.startswith("#"):
                vocab.append(token)
    return vocab


def load_confusions(char_path, word_path, vocab_path) -> ConfusionSets:
    """Load confusion maps and the replacement vocabulary.

    char_path and word_path may be None for empty maps; the vocabulary is
    required because replacement and insertion fall back to it.
    """
    return ConfusionSets(
        char_map=read_confusion_file(char_path) if char_path else {},
        word_map=read_confusion_file(word_path) if word_path else {},
        vocab=read_vocab_file(vocab_path),
    )

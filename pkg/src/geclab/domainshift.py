"""Domain-shift indicators: vocabulary overlap, type-distribution KL, pattern overlap."""

from __future__ import annotations

import math
import random
from collections import Counter
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .datafiles import Sample
from .edits import Edit, ErrorType, extract_edits
from .tokenizer import Lexicon, tokenize

VO_SAMPLE_SIZE = 1000
EPO_SAMPLE_SIZE = 300


class ErrorPattern(NamedTuple):
    """An erroneous span and its correction."""

    src_text: str
    tgt_text: str


def pattern_of(edit: Edit) -> ErrorPattern:
    return ErrorPattern(edit.src_text, edit.tgt_text)


@dataclass(frozen=True)
class TypeDistribution:
    prob: dict[ErrorType, float]

    def __post_init__(self):
        if set(self.prob) != set(ErrorType):
            raise ValueError("distribution must cover all four error types")
        if any(p < 0 for p in self.prob.values()):
            raise ValueError("probabilities must be non-negative")
        total = sum(self.prob.values())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {total}, expected 1")


def type_distribution(edits: Sequence[Edit], smoothing_eps: float = 1e-6) -> TypeDistribution:
    """Smoothed error-type distribution; an empty edit list is uniform."""
    if smoothing_eps < 0:
        raise ValueError("smoothing_eps must be non-negative")
    counts = Counter(e.etype for e in edits)
    raw = {t: counts.get(t, 0) + smoothing_eps for t in ErrorType}
    z = sum(raw.values())
    if z <= 0:
        raise ValueError("cannot build a distribution from no edits with zero smoothing")
    return TypeDistribution({t: v / z for t, v in raw.items()})


def tds(src: TypeDistribution, tgt: TypeDistribution) -> float:
    """KL(tgt || src) in nats.  Zero entries must be smoothed away first."""
    total = 0.0
    for t in ErrorType:
        q = tgt.prob[t]
        p = src.prob[t]
        if q <= 0.0 or p <= 0.0:
            raise ValueError(f"zero probability for {t.value}; smooth the distributions first")
        total += q * math.log(q / p)
    # KL is non-negative; clamp float dust from near-identical inputs.
    return max(total, 0.0)


def _sample(population: Sequence, n: int, seed: int) -> list:
    """Uniform sample without replacement; the full population when smaller."""
    if n <= 0:
        raise ValueError("sample size must be positive")
    if len(population) <= n:
        return list(population)
    return random.Random(seed).sample(list(population), n)


def vocab_overlap(
    src_tokens: Sequence[str], tgt_tokens: Sequence[str], n: int = VO_SAMPLE_SIZE, seed: int = 0
) -> float:
    """|sampled source vocab and target vocab overlap| / |sampled target vocab|.

    Both sides draw with the same seed, so identical corpora sample
    identically and score exactly 1.
    """
    if not src_tokens or not tgt_tokens:
        raise ValueError("token corpus is empty")
    vs = set(_sample(src_tokens, n, seed))
    vt = set(_sample(tgt_tokens, n, seed))
    return len(vs & vt) / len(vt)


def epo(
    src_edits: Sequence[Edit], tgt_edits: Sequence[Edit], n: int = EPO_SAMPLE_SIZE, seed: int = 0
) -> float:
    """Fraction of sampled distinct target error patterns seen in the source sample."""
    if not src_edits or not tgt_edits:
        raise ValueError("edit list is empty")
    ps = {pattern_of(e) for e in _sample(src_edits, n, seed)}
    pt = {pattern_of(e) for e in _sample(tgt_edits, n, seed)}
    return len(ps & pt) / len(pt)


@dataclass
class IndicatorReport:
    vo: float
    tds: float
    epo: float
    vo_n: int
    epo_n: int
    seed: int
    smoothing_eps: float
    vo_undersampled: bool
    epo_undersampled: bool

    def to_dict(self) -> dict:
        return {
            "vo": self.vo,
            "tds": self.tds,
            "epo": self.epo,
            "sample_sizes": {"vo_n": self.vo_n, "epo_n": self.epo_n},
            "seed": self.seed,
            "smoothing_eps": self.smoothing_eps,
            "flags": {
                "vo_undersampled": self.vo_undersampled,
                "epo_undersampled": self.epo_undersampled,
            },
            "metadata": {
                "vo": "distinct tokens of seeded samples, |Vs & Vt| / |Vt|",
                "tds": "KL(target || source) over error-type distributions, nats",
                "epo": "distinct sampled target patterns also sampled in source",
            },
        }


def compute_indicators(
    src_samples: Sequence[Sample],
    tgt_samples: Sequence[Sample],
    granularity: str = "char",
    lexicon: Lexicon | None = None,
    vo_n: int = VO_SAMPLE_SIZE,
    epo_n: int = EPO_SAMPLE_SIZE,
    seed: int = 0,
    smoothing_eps: float = 1e-6,
) -> IndicatorReport:
    """All three indicators between a source-domain and a target-domain dataset.

    Tokens come from the sample sources; edits are pooled over every
    reference of every sample.
    """

    def corpus_tokens(samples: Sequence[Sample]) -> list[str]:
        return [t.text for s in samples for t in tokenize(s.source, granularity, lexicon)]

    def corpus_edits(samples: Sequence[Sample]) -> list[Edit]:
        out = []
        for s in samples:
            for ref in s.references:
                out.extend(extract_edits(s.source, ref, granularity, lexicon).edits)
        return out

    src_tokens = corpus_tokens(src_samples)
    tgt_tokens = corpus_tokens(tgt_samples)
    src_edits = corpus_edits(src_samples)
    tgt_edits = corpus_edits(tgt_samples)

    return IndicatorReport(
        vo=vocab_overlap(src_tokens, tgt_tokens, vo_n, seed),
        tds=tds(
            type_distribution(src_edits, smoothing_eps),
            type_distribution(tgt_edits, smoothing_eps),
        ),
        epo=epo(src_edits, tgt_edits, epo_n, seed),
        vo_n=vo_n,
        epo_n=epo_n,
        seed=seed,
        smoothing_eps=smoothing_eps,
        vo_undersampled=len(src_tokens) < vo_n or len(tgt_tokens) < vo_n,
        epo_undersampled=len(src_edits) < epo_n or len(tgt_edits) < epo_n,
    )


def format_indicator_table(report: IndicatorReport) -> str:
    rows = [
        ("vocab_overlap", f"{report.vo:.4f}"),
        ("type_dist_shift", f"{report.tds:.4f}"),
        ("error_pattern_overlap", f"{report.epo:.4f}"),
        ("vo_sample_n", str(report.vo_n)),
        ("epo_sample_n", str(report.epo_n)),
        ("seed", str(report.seed)),
    ]
    width = max(len(k) for k, _ in rows)
    return "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows)

"""Dataset-level statistics for annotated GEC corpora."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .datafiles import Sample
from .domainshift import TypeDistribution, type_distribution
from .edits import ErrorType, extract_edits
from .tokenizer import Lexicon, nfc, normalize_text, tokenize


@dataclass
class StatsReport:
    n_sentences: int
    avg_length: float
    avg_edits: float
    avg_references: float
    error_density: float
    type_token_ratio: float
    type_distribution: TypeDistribution
    granularity: str

    def to_dict(self) -> dict:
        return {
            "n_sentences": self.n_sentences,
            "avg_length": self.avg_length,
            "avg_edits": self.avg_edits,
            "avg_references": self.avg_references,
            "error_density": self.error_density,
            "type_token_ratio": self.type_token_ratio,
            "type_distribution": {t.value: p for t, p in self.type_distribution.prob.items()},
            "metadata": {
                "granularity": self.granularity,
                "avg_length_units": "NFC characters",
                "avg_edits": "mean over samples of the per-reference mean edit count",
            },
        }


def dataset_stats(
    samples: Sequence[Sample],
    granularity: str = "char",
    lexicon: Lexicon | None = None,
    smoothing_eps: float = 1e-6,
) -> StatsReport:
    """Sentence counts, lengths, edit and reference averages, density, TTR.

    A sentence counts as erroneous when any reference differs from its
    source after normalization.  avg_edits averages each sample's
    per-reference edit count before taking the dataset mean.  The
    type-token ratio is distinct over total source tokens.
    """
    if not samples:
        raise ValueError("empty dataset")
    sum_len = 0
    sum_refs = 0
    sum_edits = 0.0
    erroneous = 0
    token_total = 0
    token_types: set[str] = set()
    all_edits = []
    for s in samples:
        sum_len += len(nfc(s.source))
        sum_refs += len(s.references)
        tokens = tokenize(s.source, granularity, lexicon)
        token_total += len(tokens)
        token_types.update(t.text for t in tokens)
        src_norm = normalize_text(s.source)
        edit_counts = []
        for ref in s.references:
            es = extract_edits(s.source, ref, granularity, lexicon)
            edit_counts.append(len(es.edits))
            all_edits.extend(es.edits)
        sum_edits += sum(edit_counts) / len(edit_counts)
        if any(normalize_text(ref) != src_norm for ref in s.references):
            erroneous += 1
    if token_total == 0:
        raise ValueError("dataset has no tokens")
    n = len(samples)
    return StatsReport(
        n_sentences=n,
        avg_length=sum_len / n,
        avg_edits=sum_edits / n,
        avg_references=sum_refs / n,
        error_density=erroneous / n,
        type_token_ratio=len(token_types) / token_total,
        type_distribution=type_distribution(all_edits, smoothing_eps),
        granularity=granularity,
    )


def format_stats_table(report: StatsReport) -> str:
    dist = "  ".join(
        f"{t.value}={report.type_distribution.prob[t]:.4f}" for t in ErrorType
    )
    rows = [
        ("sentences", str(report.n_sentences)),
        ("avg_length", f"{report.avg_length:.2f}"),
        ("avg_edits", f"{report.avg_edits:.2f}"),
        ("avg_references", f"{report.avg_references:.2f}"),
        ("error_density", f"{report.error_density:.4f}"),
        ("type_token_ratio", f"{report.type_token_ratio:.4f}"),
        ("type_distribution", dist),
    ]
    width = max(len(k) for k, _ in rows)
    return "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows)

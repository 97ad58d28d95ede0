"""Scoring: edit-level F-beta, SARI, consistency under perturbation, accuracy."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .datafiles import HypothesisRecord, Sample, VariantGroup
from .edits import ErrorType, extract_edits
from .tokenizer import Lexicon, normalize_text, tokenize


@dataclass
class CountTally:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    def add(self, other: "CountTally") -> None:
        self.tp += other.tp
        self.fp += other.fp
        self.fn += other.fn


def f_beta(tally: CountTally, beta: float = 0.5) -> tuple[float, float, float]:
    """Precision, recall, and F-beta with empty-set conventions.

    A system that proposes nothing on error-free data is perfect, hence
    tp+fp == 0 yields P = 1 and symmetrically tp+fn == 0 yields R = 1.
    F is 0 when both P and R are 0.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    p = tally.tp / (tally.tp + tally.fp) if tally.tp + tally.fp else 1.0
    r = tally.tp / (tally.tp + tally.fn) if tally.tp + tally.fn else 1.0
    if p == 0.0 and r == 0.0:
        return p, r, 0.0
    b2 = beta * beta
    return p, r, (1 + b2) * p * r / (b2 * p + r)


@dataclass
class TypeScore:
    precision: float
    recall: float
    f: float
    tally: CountTally


@dataclass
class ScoreReport:
    precision: float
    recall: float
    f: float
    beta: float
    tally: CountTally
    per_type: dict[ErrorType, TypeScore]
    granularity: str

    def to_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f_beta": self.f,
            "beta": self.beta,
            "counts": {"tp": self.tally.tp, "fp": self.tally.fp, "fn": self.tally.fn},
            "per_type": {
                t.value: {
                    "precision": s.precision,
                    "recall": s.recall,
                    "f_beta": s.f,
                    "tp": s.tally.tp,
                    "fp": s.tally.fp,
                    "fn": s.tally.fn,
                }
                for t, s in self.per_type.items()
            },
            "metadata": {
                "granularity": self.granularity,
                "aggregation": "micro",
                "edit_key": "(src_beg, src_end, tgt_text)",
                "conventions": {"empty_precision": 1.0, "empty_recall": 1.0, "zero_f": 0.0},
            },
        }


def evaluate_f05(
    samples: Sequence[Sample],
    hypotheses: Sequence[HypothesisRecord],
    granularity: str = "char",
    lexicon: Lexicon | None = None,
    beta: float = 0.5,
) -> ScoreReport:
    """Corpus edit-level F-beta with per-sentence best-reference selection.

    For each sentence the reference maximizing the sentence-local F-beta is
    chosen (ties: more tp, then fewer fp, then fewer fn, then the lowest
    reference index) and its tally joins the corpus-level micro average.
    Edits match on (src_beg, src_end, tgt_text).
    """
    if not samples:
        raise ValueError("no samples to evaluate")
    hyp_map = {h.id: h.hypothesis for h in hypotheses}
    sample_ids = {s.id for s in samples}
    missing = sorted(sid for sid in sample_ids if sid not in hyp_map)
    extra = sorted(hid for hid in hyp_map if hid not in sample_ids)
    if missing or extra:
        parts = []
        if missing:
            parts.append(f"samples without hypotheses: {', '.join(missing)}")
        if extra:
            parts.append(f"hypotheses without samples: {', '.join(extra)}")
        raise ValueError("; ".join(parts))

    total = CountTally()
    per_type = {t: CountTally() for t in ErrorType}
    for sample in samples:
        hyp_edits = {
            e.key(): e
            for e in extract_edits(sample.source, hyp_map[sample.id], granularity, lexicon).edits
        }
        best = None
        for idx, ref in enumerate(sample.references):
            gold = {
                e.key(): e for e in extract_edits(sample.source, ref, granularity, lexicon).edits
            }
            tp_keys = hyp_edits.keys() & gold.keys()
            tally = CountTally(
                tp=len(tp_keys), fp=len(hyp_edits) - len(tp_keys), fn=len(gold) - len(tp_keys)
            )
            _, _, f = f_beta(tally, beta)
            rank = (f, tally.tp, -tally.fp, -tally.fn)
            if best is None or rank > best[0]:
                best = (rank, tally, tp_keys, gold)
        _, tally, tp_keys, gold = best
        total.add(tally)
        for k in tp_keys:
            per_type[gold[k].etype].tp += 1
        for k, e in hyp_edits.items():
            if k not in gold:
                per_type[e.etype].fp += 1
        for k, e in gold.items():
            if k not in hyp_edits:
                per_type[e.etype].fn += 1

    p, r, f = f_beta(total, beta)
    type_scores = {}
    for t, tally in per_type.items():
        tp_, tr_, tf_ = f_beta(tally, beta)
        type_scores[t] = TypeScore(tp_, tr_, tf_, tally)
    return ScoreReport(p, r, f, beta, total, type_scores, granularity)


def _ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _multiset_min(a: Mapping, b: Mapping) -> dict:
    out = {}
    for g, c in a.items():
        m = min(c, b.get(g, 0.0))
        if m > 1e-12:
            out[g] = m
    return out


def _multiset_sub(a: Mapping, b: Mapping) -> dict:
    out = {}
    for g, c in a.items():
        d = c - b.get(g, 0.0)
        if d > 1e-12:
            out[g] = d
    return out


def _action_f1(cand: Mapping, ref: Mapping) -> float:
    # Nothing proposed and nothing required is a perfect action.
    if not cand and not ref:
        return 1.0
    tp = sum(min(c, ref.get(g, 0.0)) for g, c in cand.items())
    p = tp / sum(cand.values()) if cand else 0.0
    r = tp / sum(ref.values()) if ref else 0.0
    if p + r == 0.0:
        return 0.0
    return 2 * p * r / (p + r)


def sari(
    source: str,
    hypothesis: str,
    references: Sequence[str],
    n_max: int = 4,
    granularity: str = "char",
    lexicon: Lexicon | None = None,
) -> float:
    """Mean n-gram F1 of the add, delete, and keep actions.

    For each n up to n_max the hypothesis is compared against the references
    relative to the source; reference n-gram counts are averaged
    fractionally across references.  All three actions are scored as F1
    (the delete action included), and the result is the plain mean over
    actions and n-gram orders.
    """
    if not references:
        raise ValueError("sari needs at least one reference")
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    s_toks = [t.text for t in tokenize(source, granularity, lexicon)]
    h_toks = [t.text for t in tokenize(hypothesis, granularity, lexicon)]
    r_toks = [[t.text for t in tokenize(r, granularity, lexicon)] for r in references]

    scores = []
    for n in range(1, n_max + 1):
        s = _ngram_counts(s_toks, n)
        h = _ngram_counts(h_toks, n)
        r_mean: dict = {}
        for toks in r_toks:
            for g, c in _ngram_counts(toks, n).items():
                r_mean[g] = r_mean.get(g, 0.0) + c
        r_mean = {g: c / len(r_toks) for g, c in r_mean.items()}

        scores.append(_action_f1(_multiset_min(s, h), _multiset_min(s, r_mean)))
        scores.append(_action_f1(_multiset_sub(s, h), _multiset_sub(s, r_mean)))
        scores.append(_action_f1(_multiset_sub(h, s), _multiset_sub(r_mean, s)))
    return sum(scores) / len(scores)


def edit_patterns(source: str, hypothesis: str, granularity: str = "char",
                  lexicon: Lexicon | None = None) -> Counter:
    """Multiset of (src_text, tgt_text, error type) patterns of one output."""
    es = extract_edits(source, hypothesis, granularity, lexicon)
    return Counter((e.src_text, e.tgt_text, e.etype) for e in es.edits)


def group_consistent(
    group: VariantGroup,
    granularity: str = "char",
    lexicon: Lexicon | None = None,
    strict_string: bool = False,
) -> bool:
    """Whether every variant of the group received a consistent output.

    Default consistency compares the multiset of edit patterns extracted
    from each (source, hypothesis) pair; strict_string instead demands
    identical normalized output strings.
    """
    if strict_string:
        outputs = {normalize_text(v.hypothesis) for v in group.variants}
        return len(outputs) == 1
    sigs = [
        edit_patterns(v.source, v.hypothesis, granularity, lexicon) for v in group.variants
    ]
    return all(sig == sigs[0] for sig in sigs[1:])


def crs(
    groups: Sequence[VariantGroup],
    granularity: str = "char",
    lexicon: Lexicon | None = None,
    strict_string: bool = False,
) -> float:
    """Fraction of variant groups with consistent outputs across variants."""
    if not groups:
        raise ValueError("crs needs at least one variant group")
    consistent = sum(
        1 for g in groups if group_consistent(g, granularity, lexicon, strict_string)
    )
    return consistent / len(groups)


# Per-annotator list of (submitted correction, golden references) pairs.
LedgerView = Mapping[str, Sequence[tuple[str, Sequence[str]]]]


@dataclass
class AccuracyReport:
    per_annotator: dict[str, float]
    counts: dict[str, tuple[int, int]]  # (correct, total)
    mean: float

    def to_dict(self) -> dict:
        return {
            "per_annotator": {
                a: {"accuracy": acc, "correct": self.counts[a][0], "total": self.counts[a][1]}
                for a, acc in self.per_annotator.items()
            },
            "mean": self.mean,
        }


def annotator_accuracy(ledger: LedgerView) -> AccuracyReport:
    """Exact-match accuracy per annotator against golden references.

    A submission is correct when its NFC-and-trim normalized text equals any
    golden reference.  Annotators with zero reviewed submissions are
    omitted; the mean averages over the remaining annotators.
    """
    per: dict[str, float] = {}
    counts: dict[str, tuple[int, int]] = {}
    for annotator, entries in ledger.items():
        if not entries:
            continue
        correct = 0
        for submitted, golden in entries:
            if not golden:
                raise ValueError(f"empty golden reference set for annotator {annotator!r}")
            norm = normalize_text(submitted)
            if any(norm == normalize_text(g) for g in golden):
                correct += 1
        per[annotator] = correct / len(entries)
        counts[annotator] = (correct, len(entries))
    mean = sum(per.values()) / len(per) if per else 0.0
    return AccuracyReport(per, counts, mean)

"""geclab: a data workbench for grammatical error correction.

Tokenization with source offsets, Levenshtein edit extraction with an
M2-style interchange format, edit-level and n-gram metrics, domain-shift
indicators, rule-based corruption for synthetic training pairs, corpus
statistics, and an event-sourced annotation service.
"""

from .corruptor import (
    ConfusionSets,
    CorruptedPair,
    CorruptionConfig,
    corrupt_corpus,
    corrupt_sentence,
    load_confusions,
)
from .datafiles import (
    DataFileError,
    HypothesisRecord,
    Sample,
    Variant,
    VariantGroup,
    load_hypotheses,
    load_samples,
    load_variant_groups,
    write_samples_jsonl,
)
from .domainshift import (
    ErrorPattern,
    IndicatorReport,
    TypeDistribution,
    compute_indicators,
    epo,
    tds,
    type_distribution,
    vocab_overlap,
)
from .edits import (
    AlignOp,
    Edit,
    EditApplicationError,
    EditSet,
    ErrorType,
    OpKind,
    align,
    apply_edits,
    classify,
    extract_edits,
    merge,
)
from .m2 import M2ParseError, M2Sentence, read_m2, write_m2
from .metrics import (
    AccuracyReport,
    CountTally,
    ScoreReport,
    annotator_accuracy,
    crs,
    evaluate_f05,
    f_beta,
    sari,
)
from .stats import StatsReport, dataset_stats
from .tokenizer import (
    Lexicon,
    Token,
    char_tokenize,
    load_lexicon,
    nfc,
    normalize_text,
    tokenize,
    word_tokenize,
)

__version__ = "0.1.0"

__all__ = [
    "AccuracyReport",
    "AlignOp",
    "ConfusionSets",
    "CorruptedPair",
    "CorruptionConfig",
    "CountTally",
    "DataFileError",
    "Edit",
    "EditApplicationError",
    "EditSet",
    "ErrorPattern",
    "ErrorType",
    "HypothesisRecord",
    "IndicatorReport",
    "Lexicon",
    "M2ParseError",
    "M2Sentence",
    "OpKind",
    "Sample",
    "ScoreReport",
    "StatsReport",
    "Token",
    "TypeDistribution",
    "Variant",
    "VariantGroup",
    "align",
    "annotator_accuracy",
    "apply_edits",
    "char_tokenize",
    "classify",
    "compute_indicators",
    "corrupt_corpus",
    "corrupt_sentence",
    "crs",
    "dataset_stats",
    "epo",
    "evaluate_f05",
    "extract_edits",
    "f_beta",
    "load_confusions",
    "load_hypotheses",
    "load_lexicon",
    "load_samples",
    "load_variant_groups",
    "merge",
    "nfc",
    "normalize_text",
    "read_m2",
    "sari",
    "tds",
    "tokenize",
    "type_distribution",
    "vocab_overlap",
    "word_tokenize",
    "write_m2",
    "write_samples_jsonl",
]

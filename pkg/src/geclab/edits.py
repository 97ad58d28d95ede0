"""Token alignment, edit extraction, merging, classification, and application."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .tokenizer import Lexicon, Token, tokenize


class OpKind(Enum):
    MATCH = "match"
    SUBSTITUTE = "substitute"
    INSERT = "insert"
    DELETE = "delete"


@dataclass(frozen=True)
class AlignOp:
    """One step of a token alignment; the absent side's index is None."""

    kind: OpKind
    src_idx: int | None
    tgt_idx: int | None


class ErrorType(Enum):
    SUBSTITUTED = "S"
    MISSING = "M"
    REDUNDANT = "R"
    WORD_ORDER = "W"


@dataclass(frozen=True)
class Edit:
    """A contiguous rewrite of source tokens [src_beg, src_end) into
    target tokens [tgt_beg, tgt_end); texts are the gap-free concatenations
    of the spanned tokens."""

    src_beg: int
    src_end: int
    tgt_beg: int
    tgt_end: int
    src_text: str
    tgt_text: str
    etype: ErrorType

    def key(self) -> tuple[int, int, str]:
        # Scoring identity: position plus correction, never the target range.
        return (self.src_beg, self.src_end, self.tgt_text)


@dataclass
class EditSet:
    """The edits of one reference (or hypothesis) against one source."""

    source_tokens: list[Token]
    edits: list[Edit]
    annotator_id: int = 0


class EditApplicationError(ValueError):
    """Raised when an edit cannot be applied; carries the offending edit."""

    def __init__(self, message: str, edit: Edit):
        super().__init__(message)
        self.edit = edit


def align(src: Sequence[Token], tgt: Sequence[Token]) -> list[AlignOp]:
    """Minimum-cost alignment with costs match=0, substitute/insert/delete=1.

    Ties during the backtrace prefer match, then substitute, then delete,
    then insert, which makes the output deterministic.
    """
    n, m = len(src), len(tgt)
    cost = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        cost[i][0] = i
    for j in range(1, m + 1):
        cost[0][j] = j
    for i in range(1, n + 1):
        row = cost[i]
        prev = cost[i - 1]
        stext = src[i - 1].text
        for j in range(1, m + 1):
            best = prev[j - 1] + (stext != tgt[j - 1].text)
            if prev[j] + 1 < best:
                best = prev[j] + 1
            if row[j - 1] + 1 < best:
                best = row[j - 1] + 1
            row[j] = best
    ops: list[AlignOp] = []
    i, j = n, m
    while i > 0 or j > 0:
        c = cost[i][j]
        if i > 0 and j > 0 and src[i - 1].text == tgt[j - 1].text and c == cost[i - 1][j - 1]:
            ops.append(AlignOp(OpKind.MATCH, i - 1, j - 1))
            i -= 1
            j -= 1
        elif i > 0 and j > 0 and c == cost[i - 1][j - 1] + 1:
            ops.append(AlignOp(OpKind.SUBSTITUTE, i - 1, j - 1))
            i -= 1
            j -= 1
        elif i > 0 and c == cost[i - 1][j] + 1:
            ops.append(AlignOp(OpKind.DELETE, i - 1, None))
            i -= 1
        else:
            ops.append(AlignOp(OpKind.INSERT, None, j - 1))
            j -= 1
    ops.reverse()
    return ops


@dataclass
class _Span:
    src_beg: int
    src_end: int
    tgt_beg: int
    tgt_end: int


def merge(
    ops: Sequence[AlignOp],
    src: Sequence[Token],
    tgt: Sequence[Token],
    reorder_window: int = 3,
) -> list[Edit]:
    """Fuse alignment ops into classified edits.

    Adjacent non-match ops become a single edit.  Two edits separated by at
    most reorder_window matched tokens fuse into one word-order edit when
    the combined source and target spans carry equal token multisets
    (e.g. delete(X) ... insert(X) across a short match bridge).

    Merging never changes the realized target: applying the merged edits
    yields the same string as applying one edit per op.
    """
    spans: list[_Span] = []
    si = ti = 0
    cur: _Span | None = None
    for op in ops:
        if op.kind is OpKind.MATCH:
            cur = None
            si += 1
            ti += 1
            continue
        if cur is None:
            cur = _Span(si, si, ti, ti)
            spans.append(cur)
        if op.kind is OpKind.SUBSTITUTE:
            si += 1
            ti += 1
        elif op.kind is OpKind.DELETE:
            si += 1
        else:
            ti += 1
        cur.src_end = si
        cur.tgt_end = ti

    def texts(tokens: Sequence[Token], beg: int, end: int) -> list[str]:
        return [t.text for t in tokens[beg:end]]

    fused: list[_Span] = []
    for span in spans:
        if fused:
            prev = fused[-1]
            gap = span.src_beg - prev.src_end  # matched tokens between clusters
            if 0 < gap <= reorder_window:
                s_texts = texts(src, prev.src_beg, span.src_end)
                t_texts = texts(tgt, prev.tgt_beg, span.tgt_end)
                if Counter(s_texts) == Counter(t_texts):
                    prev.src_end = span.src_end
                    prev.tgt_end = span.tgt_end
                    continue
        fused.append(span)

    edits: list[Edit] = []
    for sp in fused:
        s_texts = texts(src, sp.src_beg, sp.src_end)
        t_texts = texts(tgt, sp.tgt_beg, sp.tgt_end)
        src_text = "".join(s_texts)
        tgt_text = "".join(t_texts)
        if src_text == tgt_text:
            # Zero-effect cluster (possible at word level when the two sides
            # merely segment the same characters differently).
            continue
        edits.append(
            Edit(
                sp.src_beg,
                sp.src_end,
                sp.tgt_beg,
                sp.tgt_end,
                src_text,
                tgt_text,
                _classify_token_lists(s_texts, t_texts),
            )
        )
    return edits


def _classify_token_lists(src_texts: Sequence[str], tgt_texts: Sequence[str]) -> ErrorType:
    if not src_texts:
        return ErrorType.MISSING
    if not tgt_texts:
        return ErrorType.REDUNDANT
    if Counter(src_texts) == Counter(tgt_texts):
        return ErrorType.WORD_ORDER
    return ErrorType.SUBSTITUTED


def classify(edit: Edit) -> ErrorType:
    """Error type from the edit's texts alone.

    The word-order test compares character multisets here; extraction itself
    classifies with the real token multisets, which only differs for
    multi-character tokens rearranged across token boundaries.
    """
    if not edit.src_text:
        return ErrorType.MISSING
    if not edit.tgt_text:
        return ErrorType.REDUNDANT
    if Counter(edit.src_text) == Counter(edit.tgt_text):
        return ErrorType.WORD_ORDER
    return ErrorType.SUBSTITUTED


def extract_edits(
    source: str,
    target: str,
    granularity: str = "char",
    lexicon: Lexicon | None = None,
    reorder_window: int = 3,
    annotator_id: int = 0,
) -> EditSet:
    """Tokenize both sides, align, merge, and classify."""
    src = tokenize(source, granularity, lexicon)
    tgt = tokenize(target, granularity, lexicon)
    ops = align(src, tgt)
    edits = merge(ops, src, tgt, reorder_window)
    return EditSet(source_tokens=src, edits=edits, annotator_id=annotator_id)


def apply_edits(source_tokens: Sequence[Token], edits: Sequence[Edit]) -> str:
    """Replace each edited source span with its target text.

    The result is the plain concatenation of token texts, so it equals the
    extraction target whenever that target has no inter-token whitespace.
    Edits must be sorted and non-overlapping in source positions.
    """
    n = len(source_tokens)
    out: list[str] = []
    cursor = 0
    for edit in edits:
        if edit.src_beg > edit.src_end or edit.src_beg < 0 or edit.src_end > n:
            raise EditApplicationError(
                f"edit range [{edit.src_beg}, {edit.src_end}) out of range for {n} tokens",
                edit,
            )
        if edit.src_beg < cursor:
            raise EditApplicationError(
                f"edit at [{edit.src_beg}, {edit.src_end}) overlaps or precedes an earlier edit",
                edit,
            )
        out.extend(t.text for t in source_tokens[cursor:edit.src_beg])
        out.append(edit.tgt_text)
        cursor = edit.src_end
    out.extend(t.text for t in source_tokens[cursor:])
    return "".join(out)

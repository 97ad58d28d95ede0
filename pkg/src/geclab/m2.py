"""Read and write the M2-style edit interchange format.

Block layout::

    S <token> <token> ...
    A <beg> <end>|||<type>|||<correction>|||REQUIRED|||-NONE-|||<annotator>

One block per sentence, blocks separated by a single blank line.  A
reference identical to the source is a noop line with range -1 -1 and type
"noop".  Error types serialize as S, M, R, W.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Iterable, TextIO

from .edits import Edit, EditSet, ErrorType
from .tokenizer import Token, char_tokenize

_NONE = "-NONE-"
_NOOP = "noop"
_TYPE_CODES = {t.value for t in ErrorType}


@dataclass
class M2Sentence:
    """One source with the edit sets of its references."""

    source_tokens: list[Token]
    edit_sets: list[EditSet]


class M2ParseError(ValueError):
    def __init__(self, message: str, line_no: int):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def write_m2(sentences: Iterable[M2Sentence], sink: TextIO | None = None) -> str | None:
    """Write sentence blocks; an empty edit set becomes a noop line.

    With no sink, the serialized text is returned instead.
    """
    if sink is None:
        buf = io.StringIO()
        write_m2(sentences, buf)
        return buf.getvalue()
    first = True
    for sent in sentences:
        if not first:
            sink.write("\n")
        first = False
        joined = " ".join(t.text for t in sent.source_tokens)
        sink.write("S " + joined + "\n" if joined else "S\n")
        for es in sent.edit_sets:
            if not es.edits:
                sink.write(f"A -1 -1|||{_NOOP}|||{_NONE}|||REQUIRED|||{_NONE}|||{es.annotator_id}\n")
                continue
            for e in es.edits:
                corr = e.tgt_text if e.tgt_text else _NONE
                sink.write(
                    f"A {e.src_beg} {e.src_end}|||{e.etype.value}|||{corr}"
                    f"|||REQUIRED|||{_NONE}|||{es.annotator_id}\n"
                )
    return None


def read_m2(lines: Iterable[str]) -> list[M2Sentence]:
    """Parse M2 blocks back into sentences.

    Target token ranges are not stored in the format; they are rebuilt
    arithmetically assuming char-level units in the corrections, which is
    exact for edit sets extracted at char granularity.  Source token offsets
    are rebuilt as a gap-free concatenation.
    """
    sentences: list[M2Sentence] = []
    src_tokens: list[Token] | None = None
    # annotator id -> raw (beg, end, code, correction) rows in file order
    groups: dict[int, list[tuple[int, int, str, str]]] = {}

    def flush() -> None:
        nonlocal src_tokens, groups
        if src_tokens is None:
            return
        edit_sets = [
            _rebuild_edit_set(src_tokens, rows, annotator) for annotator, rows in groups.items()
        ]
        sentences.append(M2Sentence(src_tokens, edit_sets))
        src_tokens = None
        groups = {}

    for line_no, raw in enumerate(lines, 1):
        line = raw.rstrip("\n")
        if not line.strip():
            flush()
            continue
        if line == "S" or line.startswith("S "):
            flush()
            src_tokens = _rebuild_tokens(line[2:].split(" ") if len(line) > 1 else [])
        elif line.startswith("A "):
            if src_tokens is None:
                raise M2ParseError("annotation line before any source line", line_no)
            annotator, row = _parse_annotation(line, line_no)
            rows = groups.setdefault(annotator, [])
            if row is not None:
                if row[1] > len(src_tokens):
                    raise M2ParseError(
                        f"edit range {row[0]} {row[1]} exceeds source length "
                        f"{len(src_tokens)}",
                        line_no,
                    )
                if rows and row[0] < rows[-1][1]:
                    raise M2ParseError("edit ranges overlap or run backwards", line_no)
                rows.append(row)
        else:
            raise M2ParseError(f"unrecognized line {line!r}", line_no)
    flush()
    return sentences


def _rebuild_tokens(texts: list[str]) -> list[Token]:
    tokens = []
    pos = 0
    for text in texts:
        if text:
            tokens.append(Token(text, pos, pos + len(text)))
            pos += len(text)
    return tokens


def _parse_annotation(
    line: str, line_no: int
) -> tuple[int, tuple[int, int, str, str] | None]:
    fields = line[2:].split("|||")
    if len(fields) != 6:
        raise M2ParseError(f"expected 6 '|||' fields, got {len(fields)}", line_no)
    span, code, corr, required, _none, annotator_s = fields
    if required != "REQUIRED":
        raise M2ParseError(f"unexpected field {required!r}, expected 'REQUIRED'", line_no)
    parts = span.split()
    if len(parts) != 2:
        raise M2ParseError(f"bad edit range {span!r}", line_no)
    try:
        beg, end = int(parts[0]), int(parts[1])
    except ValueError:
        raise M2ParseError(f"non-integer edit range {span!r}", line_no) from None
    try:
        annotator = int(annotator_s)
    except ValueError:
        raise M2ParseError(f"non-integer annotator id {annotator_s!r}", line_no) from None
    if code == _NOOP:
        if (beg, end) != (-1, -1):
            raise M2ParseError("noop line must use range -1 -1", line_no)
        return annotator, None
    if code not in _TYPE_CODES:
        raise M2ParseError(f"unknown error type {code!r}", line_no)
    if beg < 0 or end < beg:
        raise M2ParseError(f"bad edit range {span!r}", line_no)
    return annotator, (beg, end, code, "" if corr == _NONE else corr)


def _rebuild_edit_set(
    src_tokens: list[Token], rows: list[tuple[int, int, str, str]], annotator: int
) -> EditSet:
    edits = []
    shift = 0  # net target-token offset accumulated by earlier edits
    for beg, end, code, corr in rows:
        src_text = "".join(t.text for t in src_tokens[beg:end])
        tgt_len = len(char_tokenize(corr)) if corr else 0
        tgt_beg = beg + shift
        edits.append(Edit(beg, end, tgt_beg, tgt_beg + tgt_len, src_text, corr, ErrorType(code)))
        shift += tgt_len - (end - beg)
    return EditSet(source_tokens=src_tokens, edits=edits, annotator_id=annotator)

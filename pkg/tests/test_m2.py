"""M2 serialization round trip and error reporting."""

import io
import random

import pytest

from geclab.edits import extract_edits
from geclab.m2 import M2ParseError, M2Sentence, read_m2, write_m2

from conftest import CJK_POOL


def test_write_block_literal():
    es = extract_edits("天汽很好", "天气很好")
    block = write_m2([M2Sentence(es.source_tokens, [es])])
    assert block == (
        "S 天 汽 很 好\n"
        "A 1 2|||S|||气|||REQUIRED|||-NONE-|||0\n"
    )


def test_write_noop_literal():
    es = extract_edits("天气很好", "天气很好")
    block = write_m2([M2Sentence(es.source_tokens, [es])])
    assert block == (
        "S 天 气 很 好\n"
        "A -1 -1|||noop|||-NONE-|||REQUIRED|||-NONE-|||0\n"
    )


def test_write_deletion_uses_none_marker():
    es = extract_edits("我喜欢吃苹果果", "我喜欢吃苹果")
    block = write_m2([M2Sentence(es.source_tokens, [es])])
    assert "A 5 6|||R|||-NONE-|||REQUIRED|||-NONE-|||0" in block


def test_blocks_separated_by_blank_line():
    a = extract_edits("天汽", "天气")
    b = extract_edits("很好", "很好")
    text = write_m2(
        [M2Sentence(a.source_tokens, [a]), M2Sentence(b.source_tokens, [b])]
    )
    assert "\n\nS 很 好\n" in text
    assert not text.endswith("\n\n")


def test_round_trip_single_annotator():
    es = extract_edits("我喜欢吃苹果果", "我喜欢吃苹果")
    text = write_m2([M2Sentence(es.source_tokens, [es])])
    back = read_m2(io.StringIO(text))
    assert len(back) == 1
    assert [t.text for t in back[0].source_tokens] == list("我喜欢吃苹果果")
    assert back[0].edit_sets[0].edits[0].src_beg == 5
    assert back[0].edit_sets[0].edits[0].tgt_text == ""
    assert write_m2(back) == text


def test_round_trip_multiple_annotators():
    src = "他天气很好说"
    es0 = extract_edits(src, "他说天气很好", annotator_id=0)
    es1 = extract_edits(src, "天气很好", annotator_id=1)
    text = write_m2([M2Sentence(es0.source_tokens, [es0, es1])])
    back = read_m2(io.StringIO(text))
    assert [e.annotator_id for e in (back[0].edit_sets[0], back[0].edit_sets[1])] == [0, 1]
    assert write_m2(back) == text


def test_round_trip_random_char_edits():
    rng = random.Random(3)
    sentences = []
    for _ in range(40):
        src = "".join(rng.choice(CJK_POOL) for _ in range(rng.randint(1, 12)))
        tgt = "".join(rng.choice(CJK_POOL) for _ in range(rng.randint(1, 12)))
        es = extract_edits(src, tgt)
        sentences.append(M2Sentence(es.source_tokens, [es]))
    text = write_m2(sentences)
    back = read_m2(io.StringIO(text))
    assert write_m2(back) == text
    for orig, parsed in zip(sentences, back):
        assert [t.text for t in parsed.source_tokens] == [
            t.text for t in orig.source_tokens
        ]
        orig_edits = orig.edit_sets[0].edits
        got_edits = parsed.edit_sets[0].edits
        assert [(e.src_beg, e.src_end, e.tgt_beg, e.tgt_end, e.src_text, e.tgt_text, e.etype)
                for e in got_edits] == [
            (e.src_beg, e.src_end, e.tgt_beg, e.tgt_end, e.src_text, e.tgt_text, e.etype)
            for e in orig_edits
        ]


def test_read_rejects_annotation_before_source():
    with pytest.raises(M2ParseError) as err:
        read_m2(io.StringIO("A 0 1|||S|||气|||REQUIRED|||-NONE-|||0\n"))
    assert err.value.line_no == 1


def test_read_rejects_malformed_field_count():
    text = "S 天 汽\nA 1 2|||S|||气\n"
    with pytest.raises(M2ParseError) as err:
        read_m2(io.StringIO(text))
    assert err.value.line_no == 2


def test_read_rejects_bad_range():
    text = "S 天 汽\nA 1 9|||S|||气|||REQUIRED|||-NONE-|||0\n"
    with pytest.raises(M2ParseError) as err:
        read_m2(io.StringIO(text))
    assert err.value.line_no == 2


def test_read_rejects_unknown_type_code():
    text = "S 天 汽\nA 1 2|||X|||气|||REQUIRED|||-NONE-|||0\n"
    with pytest.raises(M2ParseError):
        read_m2(io.StringIO(text))


def test_read_rejects_unknown_line_kind():
    text = "S 天 汽\nB nonsense\n"
    with pytest.raises(M2ParseError) as err:
        read_m2(io.StringIO(text))
    assert err.value.line_no == 2


def test_read_skips_extra_blank_lines():
    es = extract_edits("天汽", "天气")
    text = write_m2([M2Sentence(es.source_tokens, [es])]) + "\n\n"
    back = read_m2(io.StringIO(text))
    assert len(back) == 1

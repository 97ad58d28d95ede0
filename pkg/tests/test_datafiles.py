"""JSONL dataset file parsing."""

import io
import json

import pytest

from geclab.datafiles import (
    DataFileError,
    Sample,
    read_hypotheses_jsonl,
    read_samples_jsonl,
    read_variant_groups_jsonl,
    sample_to_dict,
    write_samples_jsonl,
)


def test_read_samples_full_record():
    lines = [
        '{"id": "s1", "source": "天汽", "references": ["天气"], "domain": "news"}',
        "",
        '{"id": "s2", "source": "他好", "references": ["他好"], "need_context": true}',
    ]
    samples = read_samples_jsonl(lines)
    assert [s.id for s in samples] == ["s1", "s2"]
    assert samples[0].domain == "news"
    assert samples[0].need_context is False
    assert samples[1].need_context is True
    assert samples[1].domain == ""


@pytest.mark.parametrize(
    "line,fragment",
    [
        ("not json", "invalid JSON"),
        ("[1, 2]", "JSON object"),
        ('{"source": "x", "references": ["y"]}', "id"),
        ('{"id": "a", "references": ["y"]}', "source"),
        ('{"id": "a", "source": "x"}', "references"),
        ('{"id": "a", "source": "x", "references": []}', "non-empty"),
        ('{"id": "a", "source": "x", "references": [1]}', "strings"),
        ('{"id": 3, "source": "x", "references": ["y"]}', "wrong type"),
    ],
)
def test_read_samples_rejects_malformed(line, fragment):
    with pytest.raises(DataFileError) as err:
        read_samples_jsonl([line], name="data.jsonl")
    assert fragment in str(err.value)
    assert "data.jsonl" in str(err.value)


def test_read_samples_rejects_duplicate_id():
    lines = [
        '{"id": "a", "source": "x", "references": ["y"]}',
        '{"id": "a", "source": "z", "references": ["w"]}',
    ]
    with pytest.raises(DataFileError) as err:
        read_samples_jsonl(lines)
    assert err.value.line_no == 2


def test_read_hypotheses():
    records = read_hypotheses_jsonl(['{"id": "a", "hypothesis": "天气"}'])
    assert records[0].hypothesis == "天气"
    with pytest.raises(DataFileError):
        read_hypotheses_jsonl(
            ['{"id": "a", "hypothesis": "x"}', '{"id": "a", "hypothesis": "y"}']
        )


def test_read_variant_groups():
    line = json.dumps(
        {
            "group_id": "g1",
            "variants": [
                {"variant_id": "v1", "source": "天汽", "hypothesis": "天气"},
                {"variant_id": "v2", "source": "天汽好", "hypothesis": "天气好"},
            ],
        },
        ensure_ascii=False,
    )
    groups = read_variant_groups_jsonl([line])
    assert groups[0].group_id == "g1"
    assert [v.variant_id for v in groups[0].variants] == ["v1", "v2"]


def test_read_variant_groups_needs_two_variants():
    line = json.dumps(
        {"group_id": "g", "variants": [
            {"variant_id": "v", "source": "x", "hypothesis": "y"}]}
    )
    with pytest.raises(DataFileError, match="at least 2"):
        read_variant_groups_jsonl([line])


def test_read_variant_groups_rejects_duplicate_variant_id():
    line = json.dumps(
        {
            "group_id": "g",
            "variants": [
                {"variant_id": "v", "source": "a", "hypothesis": "b"},
                {"variant_id": "v", "source": "c", "hypothesis": "d"},
            ],
        }
    )
    with pytest.raises(DataFileError, match="duplicate variant"):
        read_variant_groups_jsonl([line])


def test_write_then_read_round_trip():
    samples = [
        Sample(id="a", source="天汽", references=["天气", "天汽"], domain="news"),
        Sample(id="b", source="他好", references=["他好"], need_context=True),
    ]
    buf = io.StringIO()
    write_samples_jsonl(samples, buf)
    back = read_samples_jsonl(buf.getvalue().splitlines())
    assert back == samples
    assert "need_context" not in json.loads(buf.getvalue().splitlines()[0])


def test_sample_to_dict_is_json_ready():
    d = sample_to_dict(Sample(id="a", source="天", references=["天"]))
    assert d == {"id": "a", "source": "天", "references": ["天"], "domain": ""}

"""JSONL data files: samples, hypotheses, and variant groups."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, TextIO


class DataFileError(ValueError):
    def __init__(self, message: str, name: str = "", line_no: int = 0):
        prefix = f"{name}: line {line_no}: " if line_no else (f"{name}: " if name else "")
        super().__init__(prefix + message)
        self.name = name
        self.line_no = line_no


@dataclass
class Sample:
    """One sentence with its golden references and domain tag."""

    id: str
    source: str
    references: list[str]
    domain: str = ""
    need_context: bool = False


@dataclass
class HypothesisRecord:
    id: str
    hypothesis: str


@dataclass
class Variant:
    variant_id: str
    source: str
    hypothesis: str


@dataclass
class VariantGroup:
    """Perturbed variants of one case, scored together for consistency."""

    group_id: str
    variants: list[Variant] = field(default_factory=list)


def _records(lines: Iterable[str], name: str):
    for line_no, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataFileError(f"invalid JSON: {exc}", name, line_no) from None
        if not isinstance(obj, dict):
            raise DataFileError("expected a JSON object", name, line_no)
        yield line_no, obj


def _require(obj: dict, key: str, kind, name: str, line_no: int):
    if key not in obj:
        raise DataFileError(f"missing required key {key!r}", name, line_no)
    value = obj[key]
    if not isinstance(value, kind):
        raise DataFileError(f"key {key!r} has wrong type {type(value).__name__}", name, line_no)
    return value


def read_samples_jsonl(lines: Iterable[str], name: str = "<samples>") -> list[Sample]:
    samples = []
    seen: set[str] = set()
    for line_no, obj in _records(lines, name):
        sid = _require(obj, "id", str, name, line_no)
        source = _require(obj, "source", str, name, line_no)
        refs = _require(obj, "references", list, name, line_no)
        if not refs or not all(isinstance(r, str) for r in refs):
            raise DataFileError("references must be a non-empty list of strings", name, line_no)
        if sid in seen:
            raise DataFileError(f"duplicate sample id {sid!r}", name, line_no)
        seen.add(sid)
        samples.append(
            Sample(
                id=sid,
                source=source,
                references=list(refs),
                domain=obj.get("domain", ""),
                need_context=bool(obj.get("need_context", False)),
            )
        )
    return samples


def read_hypotheses_jsonl(lines: Iterable[str], name: str = "<hypotheses>") -> list[HypothesisRecord]:
    records = []
    seen: set[str] = set()
    for line_no, obj in _records(lines, name):
        hid = _require(obj, "id", str, name, line_no)
        hyp = _require(obj, "hypothesis", str, name, line_no)
        if hid in seen:
            raise DataFileError(f"duplicate hypothesis id {hid!r}", name, line_no)
        seen.add(hid)
        records.append(HypothesisRecord(id=hid, hypothesis=hyp))
    return records


def read_variant_groups_jsonl(lines: Iterable[str], name: str = "<groups>") -> list[VariantGroup]:
    groups = []
    seen: set[str] = set()
    for line_no, obj in _records(lines, name):
        gid = _require(obj, "group_id", str, name, line_no)
        raw_variants = _require(obj, "variants", list, name, line_no)
        if gid in seen:
            raise DataFileError(f"duplicate group id {gid!r}", name, line_no)
        seen.add(gid)
        variants = []
        vids: set[str] = set()
        for item in raw_variants:
            if not isinstance(item, dict):
                raise DataFileError("variants must be JSON objects", name, line_no)
            vid = _require(item, "variant_id", str, name, line_no)
            if vid in vids:
                raise DataFileError(f"duplicate variant id {vid!r} in group {gid!r}", name, line_no)
            vids.add(vid)
            variants.append(
                Variant(
                    variant_id=vid,
                    source=_require(item, "source", str, name, line_no),
                    hypothesis=_require(item, "hypothesis", str, name, line_no),
                )
            )
        if len(variants) < 2:
            raise DataFileError(f"group {gid!r} needs at least 2 variants", name, line_no)
        groups.append(VariantGroup(group_id=gid, variants=variants))
    return groups


def sample_to_dict(sample: Sample) -> dict:
    obj: dict = {
        "id": sample.id,
        "source": sample.source,
        "references": list(sample.references),
        "domain": sample.domain,
    }
    if sample.need_context:
        obj["need_context"] = True
    return obj


def write_samples_jsonl(samples: Iterable[Sample], sink: TextIO) -> None:
    for sample in samples:
        sink.write(json.dumps(sample_to_dict(sample), ensure_ascii=False) + "\n")


def load_samples(path) -> list[Sample]:
    with open(path, encoding="utf-8") as fh:
        return read_samples_jsonl(fh, name=str(path))


def load_hypotheses(path) -> list[HypothesisRecord]:
    with open(path, encoding="utf-8") as fh:
        return read_hypotheses_jsonl(fh, name=str(path))


def load_variant_groups(path) -> list[VariantGroup]:
    with open(path, encoding="utf-8") as fh:
        return read_variant_groups_jsonl(fh, name=str(path))

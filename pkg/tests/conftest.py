"""Shared helpers: synthetic clean corpora and toy confusion resources."""

from __future__ import annotations

import random

import pytest
from hypothesis import settings

from geclab.corruptor import ConfusionSets
from geclab.tokenizer import Lexicon

settings.register_profile("suite", deadline=None, max_examples=60)
settings.load_profile("suite")

# Small pool of common characters; plain BMP ideographs, already NFC.
CJK_POOL = "天气很好他昨去公园吃苹果学生写论文饭店海边跑步说话开心朋友工作时间问题知道喜欢"


def make_clean_corpus(
    n_sentences: int, seed: int, min_len: int = 8, max_len: int = 24
) -> list[str]:
    """Whitespace-free synthetic sentences drawn from CJK_POOL."""
    rng = random.Random(seed)
    return [
        "".join(rng.choice(CJK_POOL) for _ in range(rng.randint(min_len, max_len)))
        for _ in range(n_sentences)
    ]


@pytest.fixture
def toy_confusions() -> ConfusionSets:
    return ConfusionSets(
        char_map={"气": ["汽", "器"], "好": ["号"], "吃": ["持"], "他": ["她", "它"]},
        word_map={"天气": ["天汽"], "苹果": ["平果"]},
        vocab=list(CJK_POOL),
    )


@pytest.fixture
def toy_lexicon() -> Lexicon:
    return Lexicon.from_words(["天气", "苹果", "公园", "学生", "论文", "朋友", "时间", "问题"])

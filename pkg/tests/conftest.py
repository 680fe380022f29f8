import itertools
import os

import numpy as np
import pytest

from g2p_complexity.lexicon import LexiconEntry
from g2p_complexity.modeling import ModelConfig
from g2p_complexity.tensor import finite_checks

# Toy orthography: five letters, one sound each
TOY_SOUNDS = {"a": "ɑ", "b": "b", "c": "k", "d": "ð", "e": "ə"}


def toy_lexicon_lines(letters: str = "abcde", length: int = 3) -> list[str]:
    lines = []
    for combo in itertools.product(letters, repeat=length):
        word = "".join(combo)
        lines.append(f"{word}\t/{''.join(TOY_SOUNDS[c] for c in word)}/")
    return lines


@pytest.fixture(autouse=True)
def _finite_values():
    with finite_checks(True):
        yield


@pytest.fixture
def toy_lexicon_text() -> str:
    return "\n".join(toy_lexicon_lines()) + "\n"


@pytest.fixture
def toy_entries() -> list[LexiconEntry]:
    out = []
    for line in toy_lexicon_lines():
        word, pron = line.split("\t")
        out.append(LexiconEntry(word=word, pronunciations=(pron.strip("/"),)))
    return out


@pytest.fixture
def tiny_config() -> ModelConfig:
    return ModelConfig(src_vocab_size=9, tgt_vocab_size=9, embedding_dim=8, num_layers=1, ff_size=8,
                       attention_size=8, num_heads=2, dropout=0.1, max_seq_len=16)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def write_lexicon(tmp_path):
    def _write(tag: str, lines: list[str]) -> str:
        path = os.path.join(tmp_path, f"{tag}.txt")
        with open(path, "w", encoding="utf-8") as f:
            f.write("\n".join(lines) + "\n")
        return path
    return _write

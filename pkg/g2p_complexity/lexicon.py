# g2p_complexity/lexicon.py
from __future__ import annotations
import csv
import logging
import math
import re
import unicodedata
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, Sequence

import pandas as pd

from .config import SAMPLE_SIZE, SPLIT_SIZES
from .errors import (
    EmptyCorpus, InsufficientData, InvalidArgument, InvalidUtf8, MalformedLine, VocabularyMismatch,
)
from .utils import STREAM_SAMPLING, sample_indices

logger = logging.getLogger(__name__)

# `/pron/` or `/pron1/, /pron2/, ...`
_PRON_FIELD = re.compile(r"^/[^/]+/(?:\s*,\s*/[^/]+/)*$")
_PRON_GROUP = re.compile(r"/([^/]+)/")

PAD, BOS, EOS, UNK = 0, 1, 2, 3
SPECIAL_TOKENS = ("<pad>", "<s>", "</s>", "<unk>")

SPLIT_COLUMNS = ["language_tag", "seed", "split", "word", "pronunciation"]


class Side(str, Enum):
    GRAPHEME = "grapheme"
    PHONEME = "phoneme"


@dataclass(frozen=True)
class LexiconEntry:
    word: str
    pronunciations: tuple[str, ...]

    @property
    def target(self) -> str:
        # First listed variant is the training target
        return self.pronunciations[0]


@dataclass(frozen=True)
class TokenSequence:
    tokens: tuple[str, ...]
    side: Side

    def text(self) -> str:
        return "".join(self.tokens)

    def __len__(self) -> int:
        return len(self.tokens)


Pair = tuple[TokenSequence, TokenSequence]


# ---------- parsing / normalization ----------
def parse_lexicon(raw: bytes | str) -> list[LexiconEntry]:
    """Parse an ipa-dict style TSV (`word<TAB>/pron/[, /pron/...]`)."""
    if isinstance(raw, (bytes, bytearray)):
        try:
            text = bytes(raw).decode("utf-8")
        except UnicodeDecodeError as e:
            raise InvalidUtf8(e.start) from e
    else:
        text = raw
    if text.startswith("\ufeff"):
        text = text[1:]

    entries: list[LexiconEntry] = []
    for line_no, line in enumerate(text.split("\n"), start=1):
        line = line.rstrip("\r")
        if not line.strip():
            continue
        word, tab, prons = line.partition("\t")
        prons = prons.strip()
        if not tab or not word or not _PRON_FIELD.match(prons):
            raise MalformedLine(line_no, line)
        variants = tuple(p for p in _PRON_GROUP.findall(prons))
        entries.append(LexiconEntry(word=word, pronunciations=variants))
    return entries


# str.lower() applies full mappings; these are the simple ones where the two differ
_SIMPLE_LOWER_EXCEPTIONS = {"\u0130": "i"}


def _simple_lower(word: str) -> str:
    out = []
    for ch in word:
        low = _SIMPLE_LOWER_EXCEPTIONS.get(ch) or ch.lower()
        out.append(low if len(low) == 1 else ch)
    return "".join(out)


def _strip_punctuation(word: str) -> str:
    return "".join(ch for ch in word if not unicodedata.category(ch).startswith("P"))


def normalize_entry(entry: LexiconEntry) -> LexiconEntry | None:
    """
    NFC both sides, lower-case and strip punctuation from the word.
    Pronunciations keep stress and syllable marks.
    Returns None when the word becomes empty (entry flagged for removal).
    """
    word = unicodedata.normalize("NFC", entry.word)
    word = _strip_punctuation(_simple_lower(word))
    word = unicodedata.normalize("NFC", word).strip()
    if not word:
        return None
    prons = tuple(unicodedata.normalize("NFC", p) for p in entry.pronunciations)
    return LexiconEntry(word=word, pronunciations=prons)


def normalize_lexicon(entries: Iterable[LexiconEntry]) -> list[LexiconEntry]:
    out: list[LexiconEntry] = []
    dropped = 0
    for e in entries:
        n = normalize_entry(e)
        if n is None:
            dropped += 1
        else:
            out.append(n)
    if dropped:
        logger.info("[lexicon] dropped %d entries empty after normalization", dropped)
    return out


def filter_overlong(entries: Sequence[LexiconEntry], max_seq_len: int) -> list[LexiconEntry]:
    """Drop entries that would not fit the model (target needs room for EOS/BOS)."""
    limit = max_seq_len - 1
    kept = [e for e in entries if len(e.word) <= limit and len(e.target) <= limit]
    if len(kept) < len(entries):
        logger.info("[lexicon] dropped %d overlong entries (max_seq_len=%d)", len(entries) - len(kept), max_seq_len)
    return kept


def tokenize(text: str, side: Side | str) -> TokenSequence:
    return TokenSequence(tokens=tuple(text), side=Side(side))


# ---------- vocabulary ----------
@dataclass(frozen=True)
class Vocabulary:
    """Specials at ids 0-3, then tokens sorted by code point."""
    tokens: tuple[str, ...]
    side: Side
    token_to_id: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(set(self.tokens)) != len(self.tokens):
            raise InvalidArgument("vocabulary tokens must be distinct")
        table = {t: i + len(SPECIAL_TOKENS) for i, t in enumerate(self.tokens)}
        object.__setattr__(self, "token_to_id", table)

    @property
    def inventory_size(self) -> int:
        return len(self.tokens)

    @property
    def size(self) -> int:
        return len(self.tokens) + len(SPECIAL_TOKENS)

    def id_to_token(self, i: int) -> str:
        if i < len(SPECIAL_TOKENS):
            return SPECIAL_TOKENS[i]
        return self.tokens[i - len(SPECIAL_TOKENS)]

    def encode(self, seq: TokenSequence) -> list[int]:
        if seq.side != self.side:
            raise VocabularyMismatch(f"{seq.side.value} sequence given to {self.side.value} vocabulary")
        return [self.token_to_id.get(t, UNK) for t in seq.tokens]

    def decode(self, ids: Iterable[int]) -> TokenSequence:
        """Ids back to tokens; PAD/BOS/EOS are dropped, UNK is kept."""
        toks = [self.id_to_token(int(i)) for i in ids if int(i) not in (PAD, BOS, EOS)]
        return TokenSequence(tokens=tuple(toks), side=self.side)

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(f"#side\t{self.side.value}\n")
            for i in range(self.size):
                f.write(f"{i}\t{self.id_to_token(i)}\n")

    @classmethod
    def load(cls, path: str) -> "Vocabulary":
        with open(path, "r", encoding="utf-8", newline="\n") as f:
            lines = f.read().split("\n")
        side = Side(lines[0].split("\t", 1)[1])
        rows = [ln.split("\t", 1) for ln in lines[1:] if ln]
        tokens = tuple(tok for idx, tok in rows if int(idx) >= len(SPECIAL_TOKENS))
        return cls(tokens=tokens, side=side)


def build_vocabulary(sequences: Iterable[TokenSequence]) -> Vocabulary:
    seen: set[str] = set()
    side: Side | None = None
    for seq in sequences:
        if side is None:
            side = seq.side
        elif seq.side != side:
            raise InvalidArgument("build_vocabulary needs sequences of one side")
        seen.update(seq.tokens)
    if not seen:
        raise EmptyCorpus("vocabulary input")
    return Vocabulary(tokens=tuple(sorted(seen)), side=side)


def corpus_inventories(entries: Iterable[LexiconEntry]) -> tuple[int, int]:
    """(grapheme inventory, phoneme inventory) over first-listed targets."""
    graphemes: set[str] = set()
    phonemes: set[str] = set()
    for e in entries:
        graphemes.update(e.word)
        phonemes.update(e.target)
    return len(graphemes), len(phonemes)


# ---------- sampling / splits ----------
@dataclass(frozen=True)
class DatasetSplit:
    train: list[Pair]
    dev: list[Pair]
    test: list[Pair]
    seed: int
    language_tag: str = ""

    def all_pairs(self) -> list[Pair]:
        return [*self.train, *self.dev, *self.test]

    def vocabularies(self) -> tuple[Vocabulary, Vocabulary]:
        pairs = self.all_pairs()
        return build_vocabulary(s for s, _ in pairs), build_vocabulary(t for _, t in pairs)


def _to_pair(entry: LexiconEntry) -> Pair:
    return tokenize(entry.word, Side.GRAPHEME), tokenize(entry.target, Side.PHONEME)


def _draw(entries: Sequence[LexiconEntry], seed: int, sizes: Sequence[int], language_tag: str) -> DatasetSplit:
    need = sum(sizes)
    if len(entries) < need:
        raise InsufficientData(len(entries), need)
    idx = sample_indices(len(entries), need, seed, STREAM_SAMPLING)
    n_train, n_dev, _ = sizes
    pairs = [_to_pair(entries[i]) for i in idx]
    return DatasetSplit(
        train=pairs[:n_train],
        dev=pairs[n_train:n_train + n_dev],
        test=pairs[n_train + n_dev:],
        seed=seed,
        language_tag=language_tag,
    )


def sample_and_split(
    entries: Sequence[LexiconEntry],
    seed: int,
    sample_size: int = SAMPLE_SIZE,
    sizes: Sequence[int] = SPLIT_SIZES,
    language_tag: str = "",
) -> DatasetSplit:
    """Uniform 10k sample without replacement, shuffled once, cut 8k/1k/1k."""
    if len(sizes) != 3 or any(s < 0 for s in sizes):
        raise InvalidArgument(f"sizes must be three non-negative counts, got {sizes}")
    if sum(sizes) != sample_size:
        raise InvalidArgument(f"split sizes {tuple(sizes)} do not add up to sample_size {sample_size}")
    if len(entries) < sample_size:
        raise InsufficientData(len(entries), sample_size)
    return _draw(entries, seed, sizes, language_tag)


def proportional_train_size(samples_per_char: Fraction | float | str, source_inventory: int) -> int:
    spc = Fraction(str(samples_per_char))
    if spc <= 0:
        raise InvalidArgument(f"samples_per_char must be positive, got {samples_per_char}")
    return math.ceil(spc * source_inventory)


def proportional_sample(
    entries: Sequence[LexiconEntry],
    seed: int,
    samples_per_char: Fraction | float | str,
    dev_size: int = SPLIT_SIZES[1],
    test_size: int = SPLIT_SIZES[2],
    language_tag: str = "",
) -> DatasetSplit:
    """Train size scaled to the full corpus' source inventory; dev/test fixed."""
    source_inventory, _ = corpus_inventories(entries)
    n_train = proportional_train_size(samples_per_char, source_inventory)
    return _draw(entries, seed, (n_train, dev_size, test_size), language_tag)


# ---------- split manifest ----------
def write_split_manifest(split: DatasetSplit, path: str) -> None:
    rows = []
    for name, pairs in (("train", split.train), ("dev", split.dev), ("test", split.test)):
        for src, tgt in pairs:
            rows.append((split.language_tag, split.seed, name, src.text(), tgt.text()))
    df = pd.DataFrame(rows, columns=SPLIT_COLUMNS)
    df.to_csv(path, sep="\t", header=False, index=False, quoting=csv.QUOTE_NONE,
              escapechar="\\", lineterminator="\n", encoding="utf-8")


def read_split_manifest(path: str) -> DatasetSplit:
    df = pd.read_csv(path, sep="\t", header=None, names=SPLIT_COLUMNS, dtype=str,
                     quoting=csv.QUOTE_NONE, escapechar="\\", keep_default_na=False, encoding="utf-8")
    parts: dict[str, list[Pair]] = {"train": [], "dev": [], "test": []}
    for row in df.itertuples(index=False):
        parts[row.split].append((tokenize(row.word, Side.GRAPHEME), tokenize(row.pronunciation, Side.PHONEME)))
    seed = int(df["seed"].iloc[0]) if len(df) else 0
    tag = df["language_tag"].iloc[0] if len(df) else ""
    return DatasetSplit(train=parts["train"], dev=parts["dev"], test=parts["test"], seed=seed, language_tag=tag)

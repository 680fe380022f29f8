# g2p_complexity/evaluation.py
from __future__ import annotations
import logging
from dataclasses import dataclass, field
from typing import Literal, Sequence

import editdistance
import numpy as np
import pandas as pd

from .errors import SequenceTooLong, VocabularyMismatch
from .lexicon import BOS, EOS, PAD, Pair, Side, TokenSequence
from .modeling import decode, encode
from .training import ModelCheckpoint

logger = logging.getLogger(__name__)

Denominator = Literal["max", "gold"]

PREDICTION_COLUMNS = ["word", "gold", "predicted", "item_accuracy"]


@dataclass(frozen=True)
class ItemResult:
    word: str
    gold: tuple[str, ...]
    predicted: tuple[str, ...]
    accuracy: float


@dataclass
class EvalResult:
    language_tag: str
    n_items: int
    char_accuracy: float
    wer: float
    per: float
    per_item: list[ItemResult] = field(default_factory=list)

    def summary(self) -> dict:
        return {"language": self.language_tag, "n_items": self.n_items,
                "char_accuracy": self.char_accuracy, "wer": self.wer, "per": self.per}


# ---------- metrics ----------
def char_accuracy(pred: Sequence[str] | TokenSequence, gold: Sequence[str] | TokenSequence,
                  denominator: Denominator = "max") -> float:
    """
    Position-wise agreement. Positions past the shorter sequence are
    mismatches; the denominator is max(|pred|, |gold|) (or |gold|).
    """
    p = pred.tokens if isinstance(pred, TokenSequence) else tuple(pred)
    g = gold.tokens if isinstance(gold, TokenSequence) else tuple(gold)
    matches = sum(1 for a, b in zip(p, g) if a == b)
    denom = max(len(p), len(g)) if denominator == "max" else len(g)
    if denom == 0:
        return 1.0 if not p and not g else 0.0
    return matches / denom


def levenshtein(a: Sequence[str] | TokenSequence, b: Sequence[str] | TokenSequence) -> int:
    """Minimal insertions + deletions + substitutions turning a into b."""
    a = a.tokens if isinstance(a, TokenSequence) else a
    b = b.tokens if isinstance(b, TokenSequence) else b
    return int(editdistance.eval(list(a), list(b)))


# ---------- decoding ----------
def decode_limit(src_len: int, max_seq_len: int) -> int:
    return min(2 * src_len + 8, max_seq_len)


def greedy_decode_batch(ckpt: ModelCheckpoint, sources: Sequence[TokenSequence],
                        max_lens: Sequence[int] | None = None, params=None) -> list[TokenSequence]:
    """
    Argmax decoding for a batch; each item stops at EOS or its own limit.
    np.argmax breaks ties toward the lowest id.
    """
    cfg = ckpt.model_config
    if not sources:
        return []
    params = params if params is not None else ckpt.parameters()
    encoded = [ckpt.src_vocab.encode(s) for s in sources]
    for ids in encoded:
        if len(ids) > cfg.max_seq_len:
            raise SequenceTooLong(len(ids), cfg.max_seq_len)
    limits = np.array([decode_limit(len(ids), cfg.max_seq_len) for ids in encoded] if max_lens is None
                      else [min(int(m), cfg.max_seq_len) for m in max_lens])

    B = len(encoded)
    src = np.full((B, max(1, max(len(ids) for ids in encoded))), PAD, dtype=np.int64)
    for i, ids in enumerate(encoded):
        src[i, :len(ids)] = ids
    memory, keep = encode(params, cfg, src, mode="eval")

    out: list[list[int]] = [[] for _ in range(B)]
    done = limits <= 0
    tgt = np.full((B, 1), BOS, dtype=np.int64)
    while not done.all():
        logits = decode(params, cfg, memory, keep, tgt, mode="eval").data[:, -1, :]
        nxt = logits.argmax(axis=-1)
        for i in np.flatnonzero(~done):
            tok = int(nxt[i])
            if tok == EOS:
                done[i] = True
                continue
            out[i].append(tok)
            if len(out[i]) >= limits[i]:
                done[i] = True
        if done.all() or tgt.shape[1] >= cfg.max_seq_len:
            break
        nxt = np.where(done, PAD, nxt)
        tgt = np.concatenate([tgt, nxt[:, None]], axis=1)
    return [ckpt.tgt_vocab.decode(ids) for ids in out]


def greedy_decode(ckpt: ModelCheckpoint, src: TokenSequence, max_len: int | None = None) -> TokenSequence:
    return greedy_decode_batch(ckpt, [src], None if max_len is None else [max_len])[0]


# ---------- evaluation ----------
def _strip_specials(seq: TokenSequence) -> tuple[str, ...]:
    return tuple(t for t in seq.tokens if t not in ("<pad>", "<s>", "</s>"))


def evaluate(ckpt: ModelCheckpoint, pairs: Sequence[Pair], denominator: Denominator = "max",
             batch_size: int = 256) -> EvalResult:
    for src, tgt in pairs:
        if src.side != Side.GRAPHEME or tgt.side != Side.PHONEME:
            raise VocabularyMismatch("test pairs must be (grapheme, phoneme) sequences")
    if ckpt.src_vocab.side != Side.GRAPHEME or ckpt.tgt_vocab.side != Side.PHONEME:
        raise VocabularyMismatch("checkpoint vocabularies are not (grapheme, phoneme)")

    params = ckpt.parameters()
    preds: list[TokenSequence] = []
    for start in range(0, len(pairs), batch_size):
        chunk = [s for s, _ in pairs[start:start + batch_size]]
        preds.extend(greedy_decode_batch(ckpt, chunk, params=params))

    items: list[ItemResult] = []
    exact_misses, edits, gold_len = 0, 0, 0
    for (src, gold), pred in zip(pairs, preds):
        g, p = _strip_specials(gold), _strip_specials(pred)
        items.append(ItemResult(word=src.text(), gold=g, predicted=p, accuracy=char_accuracy(p, g, denominator)))
        exact_misses += p != g
        edits += levenshtein(p, g)
        gold_len += len(g)

    n = len(items)
    acc = float(np.mean([it.accuracy for it in items])) if n else 0.0
    result = EvalResult(
        language_tag=ckpt.language_tag,
        n_items=n,
        char_accuracy=acc,
        wer=exact_misses / n if n else 0.0,
        per=edits / gold_len if gold_len else float(edits > 0),
        per_item=items,
    )
    logger.info("[evaluate] %s: n=%d char_accuracy=%.4f wer=%.4f per=%.4f",
                result.language_tag or "?", n, result.char_accuracy, result.wer, result.per)
    return result


def write_predictions(result: EvalResult, path: str) -> None:
    df = pd.DataFrame(
        [(it.word, "".join(it.gold), "".join(it.predicted), f"{it.accuracy:.6f}") for it in result.per_item],
        columns=PREDICTION_COLUMNS,
    )
    df.to_csv(path, sep="\t", index=False, lineterminator="\n", encoding="utf-8")


def write_summary(result: EvalResult, path: str) -> None:
    pd.DataFrame([result.summary()]).to_csv(path, sep="\t", index=False, lineterminator="\n", encoding="utf-8")


def read_summary(path: str) -> dict:
    df = pd.read_csv(path, sep="\t", dtype={"language": str}, keep_default_na=False)
    row = df.iloc[0]
    return {"language": row["language"], "n_items": int(row["n_items"]),
            "char_accuracy": float(row["char_accuracy"]), "wer": float(row["wer"]), "per": float(row["per"])}

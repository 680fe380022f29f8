# g2p_complexity/training.py
from __future__ import annotations
import logging
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigError, EmptySplit, ShapeMismatch, VocabularyMismatch
from .lexicon import BOS, EOS, PAD, DatasetSplit, Pair, Vocabulary
from .modeling import ModelConfig, Params, forward, init_parameters, parameters_from_arrays
from .tensor import cross_entropy
from .utils import STREAM_DROPOUT, STREAM_SHUFFLE, make_rng

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.005
    batch_size: int = 512
    epochs: int = 20
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0
    gradient_clip: float | None = None

    def __post_init__(self):
        if isinstance(self.epochs, bool) or not isinstance(self.epochs, int) or self.epochs < 0:
            raise ConfigError(f"epochs must be a non-negative integer, got {self.epochs!r}")
        if isinstance(self.batch_size, bool) or not isinstance(self.batch_size, int) or self.batch_size < 1:
            raise ConfigError(f"batch_size must be a positive integer, got {self.batch_size!r}")
        if not self.learning_rate > 0:
            raise ConfigError(f"learning_rate must be positive, got {self.learning_rate}")
        for name in ("adam_beta1", "adam_beta2"):
            if not 0.0 <= getattr(self, name) < 1.0:
                raise ConfigError(f"{name} must be in [0, 1), got {getattr(self, name)}")
        if not self.adam_eps > 0:
            raise ConfigError(f"adam_eps must be positive, got {self.adam_eps}")
        if self.gradient_clip is not None and not self.gradient_clip > 0:
            raise ConfigError(f"gradient_clip must be positive, got {self.gradient_clip}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class AdamState:
    """First/second moment accumulators, one pair per parameter name."""
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    t: int = 0

    @classmethod
    def zeros_like(cls, params: Params) -> "AdamState":
        return cls(
            m={k: np.zeros_like(p.data) for k, p in params.items()},
            v={k: np.zeros_like(p.data) for k, p in params.items()},
        )


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: float
    dev_loss: float
    seconds: float
    steps: int


@dataclass
class ModelCheckpoint:
    model_config: ModelConfig
    train_config: TrainConfig
    src_vocab: Vocabulary
    tgt_vocab: Vocabulary
    params: dict[str, np.ndarray]
    log: list[EpochRecord] = field(default_factory=list)
    language_tag: str = ""
    seed: int = 0

    def parameters(self) -> Params:
        """Eval-time tensors over the stored float32 arrays."""
        return parameters_from_arrays(self.params, self.model_config)


# ----- optimizer -----
def adam_step(params: Params, grads: dict[str, np.ndarray], state: AdamState, t: int,
              config: TrainConfig) -> tuple[Params, AdamState]:
    """One bias-corrected Adam update, in place on `params` and `state`."""
    if t < 1:
        raise ValueError(f"Adam step index starts at 1, got {t}")
    b1, b2 = config.adam_beta1, config.adam_beta2
    lr, eps = config.learning_rate, config.adam_eps
    c1 = 1.0 - b1 ** t
    c2 = 1.0 - b2 ** t
    for name, p in params.items():
        g = grads.get(name)
        if g is None:
            g = np.zeros_like(p.data)
        m, v = state.m[name], state.v[name]
        if g.shape != p.shape or m.shape != p.shape or v.shape != p.shape:
            raise ShapeMismatch(p.shape, g.shape if g.shape != p.shape else m.shape, f"adam_step[{name}]")
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * (g * g)
        m_hat = m / c1
        v_hat = v / c2
        p.data -= (lr * m_hat / (np.sqrt(v_hat) + eps)).astype(p.data.dtype)
    state.t = t
    return params, state


def clip_gradients(grads: dict[str, np.ndarray], max_norm: float) -> float:
    """Scale grads in place so their global L2 norm is at most max_norm; returns the pre-clip norm."""
    total = math.sqrt(sum(float((g.astype(np.float64) ** 2).sum()) for g in grads.values()))
    if total > max_norm > 0:
        scale = max_norm / (total + 1e-12)
        for g in grads.values():
            g *= scale
    return total


# ----- batching -----
def encode_pairs(pairs: Sequence[Pair], src_vocab: Vocabulary, tgt_vocab: Vocabulary) -> list[tuple[list[int], list[int]]]:
    return [(src_vocab.encode(s), tgt_vocab.encode(t)) for s, t in pairs]


def make_batch(encoded: Sequence[tuple[list[int], list[int]]]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Pad one batch to its own max length.
    Returns (src [B,S], decoder input BOS+target [B,T], loss target target+EOS [B,T]).
    """
    B = len(encoded)
    S = max(len(s) for s, _ in encoded)
    T = max(len(t) for _, t in encoded) + 1
    src = np.full((B, S), PAD, dtype=np.int64)
    tgt_in = np.full((B, T), PAD, dtype=np.int64)
    tgt_out = np.full((B, T), PAD, dtype=np.int64)
    for i, (s, t) in enumerate(encoded):
        src[i, :len(s)] = s
        tgt_in[i, 0] = BOS
        tgt_in[i, 1:len(t) + 1] = t
        tgt_out[i, :len(t)] = t
        tgt_out[i, len(t)] = EOS
    return src, tgt_in, tgt_out


def _batches(encoded, batch_size: int, order: np.ndarray | None = None):
    idx = np.arange(len(encoded)) if order is None else order
    for start in range(0, len(idx), batch_size):
        yield make_batch([encoded[i] for i in idx[start:start + batch_size]])


def dataset_loss(params: Params, cfg: ModelConfig, encoded, batch_size: int) -> float:
    """Token-weighted eval-mode cross-entropy; NaN for an empty set."""
    total, count = 0.0, 0
    for src, tgt_in, tgt_out in _batches(encoded, batch_size):
        logits = forward(params, cfg, src, tgt_in, mode="eval")
        n = int((tgt_out != PAD).sum())
        total += float(cross_entropy(logits, tgt_out, ignore_id=PAD).data) * n
        count += n
    return total / count if count else float("nan")


def teacher_forced_accuracy(params: Params, cfg: ModelConfig, encoded, batch_size: int = 512) -> float:
    """Share of non-PAD target positions (EOS included) predicted exactly under teacher forcing."""
    hits, count = 0, 0
    for src, tgt_in, tgt_out in _batches(encoded, batch_size):
        logits = forward(params, cfg, src, tgt_in, mode="eval").data
        keep = tgt_out != PAD
        hits += int(((logits.argmax(axis=-1) == tgt_out) & keep).sum())
        count += int(keep.sum())
    return hits / count if count else 1.0


# ----- loop -----
def train_language(split: DatasetSplit, src_vocab: Vocabulary, tgt_vocab: Vocabulary,
                   model_cfg: ModelConfig | None = None, train_cfg: TrainConfig | None = None) -> ModelCheckpoint:
    """Fixed-length Adam training (no schedule, no early stopping); returns the final-epoch checkpoint."""
    train_cfg = train_cfg or TrainConfig()
    model_cfg = model_cfg or ModelConfig(src_vocab_size=src_vocab.size, tgt_vocab_size=tgt_vocab.size)
    if (model_cfg.src_vocab_size, model_cfg.tgt_vocab_size) != (src_vocab.size, tgt_vocab.size):
        raise VocabularyMismatch(
            f"model vocab sizes {(model_cfg.src_vocab_size, model_cfg.tgt_vocab_size)} "
            f"!= vocabularies {(src_vocab.size, tgt_vocab.size)}")
    if not split.train:
        raise EmptySplit("train")

    tag = split.language_tag or "?"
    params = init_parameters(model_cfg, train_cfg.seed)
    train_enc = encode_pairs(split.train, src_vocab, tgt_vocab)
    dev_enc = encode_pairs(split.dev, src_vocab, tgt_vocab)
    shuffle_rng = make_rng(train_cfg.seed, STREAM_SHUFFLE)
    dropout_rng = make_rng(train_cfg.seed, STREAM_DROPOUT)
    state = AdamState.zeros_like(params)
    log: list[EpochRecord] = []
    step = 0

    for epoch in range(1, train_cfg.epochs + 1):
        t0 = time.perf_counter()
        total, count = 0.0, 0
        order = shuffle_rng.permutation(len(train_enc))
        for src, tgt_in, tgt_out in _batches(train_enc, train_cfg.batch_size, order):
            logits = forward(params, model_cfg, src, tgt_in, mode="train", rng=dropout_rng)
            loss = cross_entropy(logits, tgt_out, ignore_id=PAD)
            for p in params.values():
                p.zero_grad()
            loss.backward()
            grads = {k: p.grad for k, p in params.items() if p.grad is not None}
            if train_cfg.gradient_clip:
                clip_gradients(grads, train_cfg.gradient_clip)
            step += 1
            adam_step(params, grads, state, step, train_cfg)
            n = int((tgt_out != PAD).sum())
            total += float(loss.data) * n
            count += n
        train_loss = total / count
        dev_loss = dataset_loss(params, model_cfg, dev_enc, train_cfg.batch_size)
        rec = EpochRecord(epoch=epoch, train_loss=train_loss, dev_loss=dev_loss,
                          seconds=time.perf_counter() - t0, steps=step)
        log.append(rec)
        logger.info("[train] %s epoch %d/%d train_loss=%.4f dev_loss=%.4f (%.1fs, step %d)",
                    tag, epoch, train_cfg.epochs, train_loss, dev_loss, rec.seconds, step)

    return ModelCheckpoint(
        model_config=model_cfg,
        train_config=train_cfg,
        src_vocab=src_vocab,
        tgt_vocab=tgt_vocab,
        params={k: p.data.astype(np.float32) for k, p in params.items()},
        log=log,
        language_tag=split.language_tag,
        seed=train_cfg.seed,
    )

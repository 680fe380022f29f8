# g2p_complexity/modeling.py
"""
Character-level encoder-decoder transformer (post-norm, sinusoidal
positions, ReLU feed-forward, untied output projection).

Parameters are a flat, ordered `dict[str, Tensor]`; their names and shapes
are a pure function of `ModelConfig` (see `parameter_shapes`).
"""
from __future__ import annotations
import math
from dataclasses import asdict, dataclass
from typing import Literal

import numpy as np

from .config import MAX_SEQ_LEN
from .errors import ConfigError, IdOutOfRange, SequenceTooLong
from .lexicon import PAD
from .tensor import (
    Tensor, dropout, embedding, get_dtype, layer_norm, matmul, relu, reshape, softmax, transpose,
)
from .utils import STREAM_INIT, make_rng

Params = dict[str, Tensor]
Mode = Literal["train", "eval"]

# Additive mask value; exp() of it underflows to exactly zero
NEG_INF = -1e9


@dataclass(frozen=True)
class ModelConfig:
    src_vocab_size: int
    tgt_vocab_size: int
    embedding_dim: int = 32
    num_layers: int = 2
    ff_size: int = 32
    attention_size: int = 32  # total across heads
    num_heads: int = 2
    dropout: float = 0.1
    max_seq_len: int = MAX_SEQ_LEN

    def __post_init__(self):
        for name in ("src_vocab_size", "tgt_vocab_size", "embedding_dim", "num_layers",
                     "ff_size", "attention_size", "num_heads", "max_seq_len"):
            if int(getattr(self, name)) <= 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if self.attention_size % self.num_heads:
            raise ConfigError(f"attention_size {self.attention_size} not divisible by num_heads {self.num_heads}")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError(f"dropout must be in [0, 1), got {self.dropout}")

    @property
    def head_dim(self) -> int:
        return self.attention_size // self.num_heads

    def to_dict(self) -> dict:
        return asdict(self)


def _attention_shapes(prefix: str, cfg: ModelConfig) -> dict[str, tuple[int, ...]]:
    E, A = cfg.embedding_dim, cfg.attention_size
    shapes = {}
    for proj in ("q", "k", "v"):
        shapes[f"{prefix}.{proj}.weight"] = (E, A)
        shapes[f"{prefix}.{proj}.bias"] = (A,)
    shapes[f"{prefix}.o.weight"] = (A, E)
    shapes[f"{prefix}.o.bias"] = (E,)
    return shapes


def _norm_shapes(prefix: str, cfg: ModelConfig) -> dict[str, tuple[int, ...]]:
    return {f"{prefix}.gain": (cfg.embedding_dim,), f"{prefix}.bias": (cfg.embedding_dim,)}


def _ff_shapes(prefix: str, cfg: ModelConfig) -> dict[str, tuple[int, ...]]:
    E, F = cfg.embedding_dim, cfg.ff_size
    return {f"{prefix}.w1": (E, F), f"{prefix}.b1": (F,), f"{prefix}.w2": (F, E), f"{prefix}.b2": (E,)}


def parameter_shapes(cfg: ModelConfig) -> dict[str, tuple[int, ...]]:
    shapes = {
        "src_embed": (cfg.src_vocab_size, cfg.embedding_dim),
        "tgt_embed": (cfg.tgt_vocab_size, cfg.embedding_dim),
    }
    for i in range(cfg.num_layers):
        p = f"encoder.{i}"
        shapes.update(_attention_shapes(f"{p}.self_attn", cfg))
        shapes.update(_norm_shapes(f"{p}.norm1", cfg))
        shapes.update(_ff_shapes(f"{p}.ff", cfg))
        shapes.update(_norm_shapes(f"{p}.norm2", cfg))
    for i in range(cfg.num_layers):
        p = f"decoder.{i}"
        shapes.update(_attention_shapes(f"{p}.self_attn", cfg))
        shapes.update(_norm_shapes(f"{p}.norm1", cfg))
        shapes.update(_attention_shapes(f"{p}.cross_attn", cfg))
        shapes.update(_norm_shapes(f"{p}.norm2", cfg))
        shapes.update(_ff_shapes(f"{p}.ff", cfg))
        shapes.update(_norm_shapes(f"{p}.norm3", cfg))
    shapes["out_proj.weight"] = (cfg.embedding_dim, cfg.tgt_vocab_size)
    shapes["out_proj.bias"] = (cfg.tgt_vocab_size,)
    return shapes


def count_parameters(cfg: ModelConfig) -> int:
    return sum(math.prod(s) for s in parameter_shapes(cfg).values())


def init_parameters(cfg: ModelConfig, seed: int) -> Params:
    """Scaled uniform (Glorot) for matrices, zeros for biases, ones for gains."""
    rng = make_rng(seed, STREAM_INIT)
    dtype = get_dtype()
    params: Params = {}
    for name, shape in parameter_shapes(cfg).items():
        if name.endswith(".gain"):
            data = np.ones(shape, dtype=dtype)
        elif len(shape) == 1:
            data = np.zeros(shape, dtype=dtype)
        else:
            bound = math.sqrt(6.0 / (shape[0] + shape[1]))
            data = rng.uniform(-bound, bound, size=shape).astype(dtype)
        params[name] = Tensor(data, requires_grad=True)
    return params


def positional_encoding(length: int, dim: int) -> np.ndarray:
    pos = np.arange(length, dtype=np.float64)[:, None]
    i = np.arange(0, dim, 2, dtype=np.float64)
    angle = pos / np.power(10000.0, i / dim)
    pe = np.zeros((length, dim), dtype=np.float64)
    pe[:, 0::2] = np.sin(angle)
    pe[:, 1::2] = np.cos(angle[:, : dim // 2])
    return pe.astype(get_dtype())


# ---------- building blocks ----------
def _linear(x: Tensor, params: Params, prefix: str) -> Tensor:
    return matmul(x, params[f"{prefix}.weight"]) + params[f"{prefix}.bias"]


def _split_heads(x: Tensor, cfg: ModelConfig) -> Tensor:
    B, T, _ = x.shape
    return transpose(reshape(x, (B, T, cfg.num_heads, cfg.head_dim)), (0, 2, 1, 3))


def _merge_heads(x: Tensor, cfg: ModelConfig) -> Tensor:
    B, _, T, _ = x.shape
    return reshape(transpose(x, (0, 2, 1, 3)), (B, T, cfg.attention_size))


def _attention(query: Tensor, memory: Tensor, mask: np.ndarray, params: Params, prefix: str,
               cfg: ModelConfig) -> Tensor:
    """Multi-head scaled dot-product attention; `mask` is additive, broadcast to [B,H,Tq,Tk]."""
    q = _split_heads(_linear(query, params, f"{prefix}.q"), cfg)
    k = _split_heads(_linear(memory, params, f"{prefix}.k"), cfg)
    v = _split_heads(_linear(memory, params, f"{prefix}.v"), cfg)
    scores = matmul(q, transpose(k, (0, 1, 3, 2))) * (1.0 / math.sqrt(cfg.head_dim))
    weights = softmax(scores + Tensor(mask), axis=-1)
    heads = matmul(weights, v)
    return _linear(_merge_heads(heads, cfg), params, f"{prefix}.o")


def _feed_forward(x: Tensor, params: Params, prefix: str) -> Tensor:
    h = relu(matmul(x, params[f"{prefix}.w1"]) + params[f"{prefix}.b1"])
    return matmul(h, params[f"{prefix}.w2"]) + params[f"{prefix}.b2"]


def _norm(x: Tensor, params: Params, prefix: str) -> Tensor:
    return layer_norm(x, params[f"{prefix}.gain"], params[f"{prefix}.bias"])


class _Dropout:
    def __init__(self, p: float, rng: np.random.Generator | None, training: bool):
        self.p, self.rng, self.training = p, rng, training

    def __call__(self, x: Tensor) -> Tensor:
        return dropout(x, self.p, self.rng, self.training)


def _embed(table: Tensor, ids: np.ndarray, cfg: ModelConfig) -> Tensor:
    T = ids.shape[1]
    x = embedding(table, ids) * math.sqrt(cfg.embedding_dim)
    return x + Tensor(positional_encoding(T, cfg.embedding_dim))


def _check_ids(ids: np.ndarray, vocab_size: int, max_len: int, name: str) -> np.ndarray:
    ids = np.asarray(ids, dtype=np.int64)
    if ids.ndim != 2:
        raise ValueError(f"{name} ids must be [batch, length], got shape {ids.shape}")
    if ids.shape[1] > max_len:
        raise SequenceTooLong(ids.shape[1], max_len)
    bad = (ids < 0) | (ids >= vocab_size)
    if bad.any():
        raise IdOutOfRange(name, int(ids[bad][0]), vocab_size)
    return ids


def _key_mask(keep: np.ndarray) -> np.ndarray:
    """[B,Tk] bool (True = attend) -> additive [B,1,1,Tk]."""
    return np.where(keep, 0.0, NEG_INF).astype(get_dtype())[:, None, None, :]


def causal_mask(T: int) -> np.ndarray:
    return np.triu(np.full((T, T), NEG_INF, dtype=get_dtype()), k=1)[None, None, :, :]


# ---------- encoder / decoder ----------
def encode(params: Params, cfg: ModelConfig, src_ids: np.ndarray, mode: Mode = "eval",
           rng: np.random.Generator | None = None, src_keep: np.ndarray | None = None) -> tuple[Tensor, np.ndarray]:
    """
    Returns (memory [B,S,E], src_keep [B,S]). `src_keep` defaults to
    `src_ids != PAD`; pass it explicitly to mask by length instead.
    """
    src_ids = _check_ids(src_ids, cfg.src_vocab_size, cfg.max_seq_len, "source")
    keep = (src_ids != PAD) if src_keep is None else np.asarray(src_keep, dtype=bool)
    drop = _Dropout(cfg.dropout, rng, mode == "train")
    mask = _key_mask(keep)

    x = drop(_embed(params["src_embed"], src_ids, cfg))
    for i in range(cfg.num_layers):
        p = f"encoder.{i}"
        x = _norm(x + drop(_attention(x, x, mask, params, f"{p}.self_attn", cfg)), params, f"{p}.norm1")
        x = _norm(x + drop(_feed_forward(x, params, f"{p}.ff")), params, f"{p}.norm2")
    return x, keep


def decode(params: Params, cfg: ModelConfig, memory: Tensor, src_keep: np.ndarray, tgt_in_ids: np.ndarray,
           mode: Mode = "eval", rng: np.random.Generator | None = None) -> Tensor:
    """Teacher-forced decoder pass; returns logits [B,T,tgt_vocab_size]."""
    tgt_in_ids = _check_ids(tgt_in_ids, cfg.tgt_vocab_size, cfg.max_seq_len, "target")
    T = tgt_in_ids.shape[1]
    drop = _Dropout(cfg.dropout, rng, mode == "train")
    self_mask = causal_mask(T) + _key_mask(tgt_in_ids != PAD)
    cross_mask = _key_mask(src_keep)

    y = drop(_embed(params["tgt_embed"], tgt_in_ids, cfg))
    for i in range(cfg.num_layers):
        p = f"decoder.{i}"
        y = _norm(y + drop(_attention(y, y, self_mask, params, f"{p}.self_attn", cfg)), params, f"{p}.norm1")
        y = _norm(y + drop(_attention(y, memory, cross_mask, params, f"{p}.cross_attn", cfg)), params, f"{p}.norm2")
        y = _norm(y + drop(_feed_forward(y, params, f"{p}.ff")), params, f"{p}.norm3")
    return _linear(y, params, "out_proj")


def forward(params: Params, cfg: ModelConfig, src_ids: np.ndarray, tgt_in_ids: np.ndarray, mode: Mode = "eval",
            rng: np.random.Generator | None = None, src_keep: np.ndarray | None = None) -> Tensor:
    if mode not in ("train", "eval"):
        raise ValueError(f"mode must be 'train' or 'eval', got {mode!r}")
    memory, keep = encode(params, cfg, src_ids, mode, rng, src_keep)
    return decode(params, cfg, memory, keep, tgt_in_ids, mode, rng)


def parameters_from_arrays(arrays: dict[str, np.ndarray], cfg: ModelConfig, requires_grad: bool = False) -> Params:
    """Wrap stored arrays as tensors after checking them against the config's shapes."""
    expected = parameter_shapes(cfg)
    if set(arrays) != set(expected):
        missing = sorted(set(expected) - set(arrays))
        extra = sorted(set(arrays) - set(expected))
        raise ConfigError(f"parameter names differ from config (missing={missing}, extra={extra})")
    out: Params = {}
    for name, shape in expected.items():
        arr = arrays[name]
        if tuple(arr.shape) != shape:
            raise ConfigError(f"{name}: stored shape {tuple(arr.shape)} != expected {shape}")
        out[name] = Tensor(arr, requires_grad=requires_grad)
    return out

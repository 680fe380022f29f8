# g2p_complexity/checkpoint.py
"""
G2PC checkpoint codec.

Layout (all integers little-endian uint32):
    b"G2PC" | version | meta_len | meta (UTF-8 JSON) | n_tensors |
    n_tensors x [name_len | name | rank | dims... | float32 LE data]
"""
from __future__ import annotations
import json
import logging
import math
import struct
from dataclasses import asdict

import numpy as np

from .errors import BadMagic, CorruptTensor, IoFailure, UnsupportedVersion
from .lexicon import Side, Vocabulary
from .modeling import ModelConfig, parameter_shapes
from .training import EpochRecord, ModelCheckpoint, TrainConfig

logger = logging.getLogger(__name__)

MAGIC = b"G2PC"
VERSION = 1
_U32 = struct.Struct("<I")


def _vocab_meta(v: Vocabulary) -> dict:
    return {"side": v.side.value, "tokens": list(v.tokens)}


def encode_checkpoint(ckpt: ModelCheckpoint) -> bytes:
    meta = {
        "language_tag": ckpt.language_tag,
        "seed": ckpt.seed,
        "model_config": ckpt.model_config.to_dict(),
        "train_config": ckpt.train_config.to_dict(),
        "src_vocab": _vocab_meta(ckpt.src_vocab),
        "tgt_vocab": _vocab_meta(ckpt.tgt_vocab),
        "log": [asdict(r) for r in ckpt.log],
    }
    meta_bytes = json.dumps(meta, ensure_ascii=False, sort_keys=True).encode("utf-8")
    parts = [MAGIC, _U32.pack(VERSION), _U32.pack(len(meta_bytes)), meta_bytes, _U32.pack(len(ckpt.params))]
    for name, arr in ckpt.params.items():
        name_b = name.encode("utf-8")
        parts += [_U32.pack(len(name_b)), name_b, _U32.pack(arr.ndim)]
        parts += [_U32.pack(d) for d in arr.shape]
        parts.append(np.ascontiguousarray(arr, dtype="<f4").tobytes())
    return b"".join(parts)


class _Reader:
    def __init__(self, buf: bytes):
        self.buf, self.pos = buf, 0

    def take(self, n: int, what: str) -> bytes:
        if self.pos + n > len(self.buf):
            raise CorruptTensor(what)
        out = self.buf[self.pos:self.pos + n]
        self.pos += n
        return out

    def u32(self, what: str) -> int:
        return _U32.unpack(self.take(4, what))[0]


def decode_checkpoint(buf: bytes) -> ModelCheckpoint:
    if buf[:4] != MAGIC:
        raise BadMagic(bytes(buf[:4]))
    r = _Reader(buf)
    r.pos = 4
    version = r.u32("<header>")
    if version != VERSION:
        raise UnsupportedVersion(version)
    meta_len = r.u32("<header>")
    try:
        meta = json.loads(r.take(meta_len, "<metadata>").decode("utf-8"))
        model_cfg = ModelConfig(**meta["model_config"])
        train_cfg = TrainConfig(**meta["train_config"])
        src_vocab = Vocabulary(tokens=tuple(meta["src_vocab"]["tokens"]), side=Side(meta["src_vocab"]["side"]))
        tgt_vocab = Vocabulary(tokens=tuple(meta["tgt_vocab"]["tokens"]), side=Side(meta["tgt_vocab"]["side"]))
        log = [EpochRecord(**rec) for rec in meta["log"]]
    except CorruptTensor:
        raise
    except (ValueError, KeyError, TypeError) as e:
        raise CorruptTensor("<metadata>") from e

    expected = parameter_shapes(model_cfg)
    n_tensors = r.u32("<tensor count>")
    params: dict[str, np.ndarray] = {}
    for i in range(n_tensors):
        label = f"<record {i}>"
        name_len = r.u32(label)
        try:
            name = r.take(name_len, label).decode("utf-8")
        except UnicodeDecodeError as e:
            raise CorruptTensor(label) from e
        rank = r.u32(name)
        dims = tuple(r.u32(name) for _ in range(rank))
        if expected.get(name) != dims:
            raise CorruptTensor(name)
        raw = r.take(4 * math.prod(dims), name)
        params[name] = np.frombuffer(raw, dtype="<f4").astype(np.float32).reshape(dims)
    if r.pos != len(buf):
        raise CorruptTensor("<trailing bytes>")
    missing = [n for n in expected if n not in params]
    if missing:
        raise CorruptTensor(missing[0])

    return ModelCheckpoint(
        model_config=model_cfg, train_config=train_cfg, src_vocab=src_vocab, tgt_vocab=tgt_vocab,
        params=params, log=log, language_tag=meta.get("language_tag", ""), seed=int(meta.get("seed", 0)),
    )


def save_checkpoint(ckpt: ModelCheckpoint, path: str) -> None:
    data = encode_checkpoint(ckpt)
    try:
        with open(path, "wb") as f:
            f.write(data)
    except OSError as e:
        raise IoFailure(f"cannot write checkpoint {path}: {e}") from e
    logger.debug("[checkpoint] wrote %s (%d bytes)", path, len(data))


def load_checkpoint(path: str) -> ModelCheckpoint:
    try:
        with open(path, "rb") as f:
            buf = f.read()
    except OSError as e:
        raise IoFailure(f"cannot read checkpoint {path}: {e}") from e
    return decode_checkpoint(buf)

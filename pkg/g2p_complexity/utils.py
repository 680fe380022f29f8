# g2p_complexity/utils.py
from __future__ import annotations
import hashlib
import os

import numpy as np

# Independent random streams derived from one seed
STREAM_SAMPLING = 0
STREAM_INIT = 1
STREAM_SHUFFLE = 2
STREAM_DROPOUT = 3

PCG_MULTIPLIER = 0x2360ED051FC65DA44385DF649FCCF645
_MASK128 = (1 << 128) - 1


def pcg64(seed: int, stream: int = 0) -> np.random.PCG64:
    """
    PCG64 (XSL-RR 128/64) seeded like the PCG reference `srandom`:
        inc   = 2 * stream + 1
        state = ((seed + inc) * PCG_MULTIPLIER + inc) mod 2**128
    Each raw draw steps the LCG, then outputs from the new state.
    """
    inc = (2 * int(stream) + 1) & _MASK128
    state = ((int(seed) + inc) * PCG_MULTIPLIER + inc) & _MASK128
    bg = np.random.PCG64(0)
    bg.state = {"bit_generator": "PCG64", "state": {"state": state, "inc": inc}, "has_uint32": 0, "uinteger": 0}
    return bg


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Generator over pcg64(seed, stream); used for init, shuffling and dropout."""
    return np.random.Generator(pcg64(seed, stream))


def bounded_raw(bg: np.random.PCG64, n: int) -> int:
    """Unbiased integer in [0, n): reject raw draws below 2**64 mod n, then reduce mod n."""
    threshold = (1 << 64) % n
    while True:
        r = int(bg.random_raw())
        if r >= threshold:
            return r % n


def sample_indices(n: int, k: int, seed: int, stream: int = STREAM_SAMPLING) -> list[int]:
    """
    First k slots of a partial Fisher-Yates shuffle of range(n):
        for i in 0..k-1: j = i + bounded_raw(n - i); swap(idx[i], idx[j])
    The result is an ordered uniform sample without replacement.
    """
    if not 0 <= k <= n:
        raise ValueError(f"cannot draw {k} of {n}")
    bg = pcg64(seed, stream)
    idx = list(range(n))
    for i in range(k):
        j = i + bounded_raw(bg, n - i)
        idx[i], idx[j] = idx[j], idx[i]
    return idx[:k]


def language_seed(global_seed: int, language_tag: str) -> int:
    """Stable unsigned 64-bit seed: first 8 bytes (LE) of BLAKE2b("<seed>:<tag>")."""
    digest = hashlib.blake2b(f"{int(global_seed)}:{language_tag}".encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def ensure_dir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path

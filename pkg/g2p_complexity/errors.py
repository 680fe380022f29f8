# g2p_complexity/errors.py
from __future__ import annotations
from typing import Sequence


class G2PError(Exception):
    """Base class for every error raised by g2p_complexity."""


# ----- lexicon -----
class MalformedLine(G2PError, ValueError):
    def __init__(self, line_no: int, line: str = ""):
        self.line_no = line_no
        self.line = line
        super().__init__(f"malformed lexicon line {line_no}: {line!r}")


class InvalidUtf8(G2PError, ValueError):
    def __init__(self, offset: int):
        self.offset = offset
        super().__init__(f"invalid UTF-8 at byte offset {offset}")


class EmptyCorpus(G2PError, ValueError):
    def __init__(self, what: str = "corpus"):
        super().__init__(f"no tokens observed in {what}")


class InsufficientData(G2PError, ValueError):
    def __init__(self, have: int, need: int):
        self.have = have
        self.need = need
        super().__init__(f"insufficient data: have {have} records, need {need}")


class InvalidArgument(G2PError, ValueError):
    pass


# ----- tensor -----
class ShapeMismatch(G2PError, ValueError):
    def __init__(self, a: Sequence[int], b: Sequence[int], op: str = ""):
        self.a = tuple(a)
        self.b = tuple(b)
        where = f" in {op}" if op else ""
        super().__init__(f"shape mismatch{where}: {self.a} vs {self.b}")


class NotScalar(G2PError, ValueError):
    def __init__(self, shape: Sequence[int]):
        self.shape = tuple(shape)
        super().__init__(f"backward() needs a rank-0 tensor, got shape {self.shape}")


class NonFiniteValue(G2PError, FloatingPointError):
    def __init__(self, op: str):
        self.op = op
        super().__init__(f"non-finite value produced by {op}")


class TargetOutOfRange(G2PError, IndexError):
    def __init__(self, position: tuple, target_id: int, vocab_size: int):
        self.position = position
        self.target_id = target_id
        self.vocab_size = vocab_size
        super().__init__(f"target id {target_id} at {position} out of range for V={vocab_size}")


# ----- model / training -----
class IdOutOfRange(G2PError, IndexError):
    def __init__(self, name: str, token_id: int, vocab_size: int):
        self.name = name
        self.token_id = token_id
        self.vocab_size = vocab_size
        super().__init__(f"{name} id {token_id} outside [0, {vocab_size})")


class SequenceTooLong(G2PError, ValueError):
    def __init__(self, length: int, limit: int):
        self.length = length
        self.limit = limit
        super().__init__(f"sequence length {length} exceeds max_seq_len {limit}")


class ConfigError(G2PError, ValueError):
    pass


class EmptySplit(G2PError, ValueError):
    def __init__(self, which: str = "train"):
        super().__init__(f"{which} split is empty")


class VocabularyMismatch(G2PError, ValueError):
    pass


# ----- checkpoint -----
class CheckpointError(G2PError, ValueError):
    pass


class BadMagic(CheckpointError):
    def __init__(self, found: bytes):
        self.found = found
        super().__init__(f"not a G2PC checkpoint (magic {found!r})")


class UnsupportedVersion(CheckpointError):
    def __init__(self, version: int):
        self.version = version
        super().__init__(f"unsupported checkpoint version {version}")


class CorruptTensor(CheckpointError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"corrupt or truncated checkpoint record: {name}")


class IoFailure(G2PError, OSError):
    pass


# ----- complexity / report -----
class ZeroInventory(G2PError, ValueError):
    def __init__(self, language_tag: str):
        self.language_tag = language_tag
        super().__init__(f"{language_tag}: source inventory is empty")


class EmptyReport(G2PError, ValueError):
    pass


class LengthMismatch(G2PError, ValueError):
    def __init__(self, a: int, b: int):
        super().__init__(f"length mismatch: {a} vs {b}")


# ----- pipeline -----
class ManifestError(G2PError, ValueError):
    pass


class MissingCheckpoint(G2PError, LookupError):
    def __init__(self, language_tag: str, path: str = ""):
        self.language_tag = language_tag
        super().__init__(f"{language_tag}: no checkpoint at {path or '<unknown>'}")


class IncompleteResults(G2PError, LookupError):
    def __init__(self, missing: Sequence[str]):
        self.missing = list(missing)
        super().__init__(f"no evaluation results for: {', '.join(self.missing) or '<none configured>'}")

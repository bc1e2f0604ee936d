"""Binary embedding files, companion vocabularies and run manifests.

An embedding file is a 24-byte header followed by the packed rows::

    b"BNDR" | uint32 version | uint64 n | uint64 d | n * ceil(d/64) uint64 words

All integers are little-endian; the payload has the in-memory bit layout.
"""

from __future__ import annotations

import json
import struct
import subprocess
from importlib import metadata
from pathlib import Path

import numpy as np

from .core import EmbeddingMatrix, Vocabulary, live_mask, n_words
from .errors import FormatError

MAGIC = b"BNDR"
VERSION = 1
HEADER = struct.Struct("<4sIQQ")


def file_size(n: int, d: int) -> int:
    return HEADER.size + 8 * n * n_words(d)


def vocab_path(model_path: str | Path) -> Path:
    """``model.bnd`` keeps its concept names in ``model.vocab``."""
    return Path(model_path).with_suffix(".vocab")


def manifest_path(model_path: str | Path) -> Path:
    return Path(model_path).with_suffix(".json")


def to_bytes(B: EmbeddingMatrix) -> bytes:
    return HEADER.pack(MAGIC, VERSION, B.n, B.d) + B.words.astype("<u8", copy=False).tobytes()


def from_bytes(data: bytes) -> EmbeddingMatrix:
    if len(data) < HEADER.size:
        raise FormatError("embedding file is shorter than its header")
    magic, version, n, d = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"unsupported embedding file version {version}")
    if n < 1 or d < 1:
        raise FormatError(f"invalid shape n={n}, d={d}")
    if len(data) != file_size(n, d):
        raise FormatError(f"expected {file_size(n, d)} bytes for n={n}, d={d}, got {len(data)}")
    words = np.frombuffer(data, dtype="<u8", offset=HEADER.size).reshape(n, n_words(d))
    if np.any(words & ~live_mask(d)):
        raise FormatError("padding bits are set")
    return EmbeddingMatrix(words.astype(np.uint64), d)


def save_embedding(path: str | Path, B: EmbeddingMatrix, vocab: Vocabulary | None = None) -> None:
    if vocab is not None and len(vocab) != B.n:
        raise FormatError(f"vocabulary has {len(vocab)} names for {B.n} rows")
    Path(path).write_bytes(to_bytes(B))
    if vocab is not None:
        vocab_path(path).write_text("".join(f"{s}\n" for s in vocab.names), encoding="utf-8")


def load_embedding(path: str | Path, require_vocab: bool = False):
    """Return ``(matrix, vocab)``; ``vocab`` is None when no companion file exists."""
    try:
        B = from_bytes(Path(path).read_bytes())
    except FileNotFoundError:
        raise FormatError(f"no embedding file at {path}") from None
    vp = vocab_path(path)
    if not vp.exists():
        if require_vocab:
            raise FormatError(f"missing vocabulary file {vp}")
        return B, None
    vocab = Vocabulary(vp.read_text(encoding="utf-8").splitlines())
    if len(vocab) != B.n:
        raise FormatError(f"{vp} has {len(vocab)} names for {B.n} rows")
    return B, vocab


def tool_version() -> str:
    """``git describe`` of the source tree when available, else the package version."""
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty", "--tags"],
                             cwd=Path(__file__).parent, capture_output=True, text=True, timeout=5)
        if out.returncode == 0 and out.stdout.strip():
            return out.stdout.strip()
    except (OSError, subprocess.SubprocessError):
        pass
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def write_manifest(path: str | Path, record: dict) -> None:
    record = {"tool_version": tool_version(), **record}
    Path(path).write_text(json.dumps(record, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def read_manifest(path: str | Path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))

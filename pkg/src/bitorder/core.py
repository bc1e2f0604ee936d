"""Bit-packed embedding matrix and the bitwise predicates built on it.

Rows are stored as ``ceil(d / 64)`` little-endian 64-bit words, bit ``j`` in
word ``j // 64`` at position ``j % 64``.  Padding bits above ``d - 1`` are
kept at zero by every operation, so popcounts never need masking.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, UnknownConceptError

WORD_BITS = 64
ALL_ONES = np.uint64(0xFFFFFFFFFFFFFFFF)

# forbidden-pair lookups use a dense bitmap up to this many ordered pairs
BITMAP_LIMIT = 1 << 28


def n_words(d: int) -> int:
    return (d + WORD_BITS - 1) // WORD_BITS


def live_mask(d: int) -> np.ndarray:
    """Per-word mask with ones exactly on the ``d`` live bit positions."""
    mask = np.full(n_words(d), ALL_ONES, dtype=np.uint64)
    rem = d % WORD_BITS
    if rem:
        mask[-1] = np.uint64((1 << rem) - 1)
    return mask


def popcount(words: np.ndarray) -> np.ndarray:
    """Population count of each uint64 element."""
    return np.bitwise_count(np.asarray(words, dtype=np.uint64)).astype(np.int64)


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """Pack a ``(..., d)`` 0/1 array into ``(..., ceil(d/64))`` uint64 words."""
    bits = np.asarray(bits)
    d = bits.shape[-1]
    width = n_words(d) * WORD_BITS
    padded = np.zeros(bits.shape[:-1] + (width,), dtype=np.uint8)
    padded[..., :d] = bits != 0
    packed = np.packbits(padded, axis=-1, bitorder="little")
    return np.ascontiguousarray(packed).view("<u8").astype(np.uint64)


def unpack_bits(words: np.ndarray, d: int) -> np.ndarray:
    """Inverse of :func:`pack_bits`; returns uint8 of shape ``(..., d)``."""
    words = np.ascontiguousarray(words, dtype="<u8")
    raw = words.view(np.uint8)
    return np.unpackbits(raw, axis=-1, bitorder="little")[..., :d]


@dataclass(frozen=True, eq=False)
class BitRow:
    """A single ``d``-bit vector in packed form."""

    words: np.ndarray
    d: int

    def __post_init__(self):
        words = np.ascontiguousarray(self.words, dtype=np.uint64).copy()
        if self.d < 1 or words.shape != (n_words(self.d),):
            raise DimensionError(f"{words.shape[0]} words cannot hold a {self.d}-bit row")
        words &= live_mask(self.d)
        words.flags.writeable = False
        object.__setattr__(self, "words", words)

    @classmethod
    def from_bits(cls, bits: Sequence[int] | str) -> "BitRow":
        if isinstance(bits, str):
            if not bits or set(bits) - {"0", "1"}:
                raise ValueError(f"not a bit string: {bits!r}")
            bits = [int(c) for c in bits]
        arr = np.asarray(bits, dtype=np.uint8)
        return cls(pack_bits(arr), arr.shape[0])

    @classmethod
    def zeros(cls, d: int) -> "BitRow":
        return cls(np.zeros(n_words(d), dtype=np.uint64), d)

    @classmethod
    def ones(cls, d: int) -> "BitRow":
        return cls(live_mask(d), d)

    def to_bits(self) -> tuple[int, ...]:
        return tuple(int(b) for b in unpack_bits(self.words, self.d))

    def popcount(self) -> int:
        return int(popcount(self.words).sum())

    def _check(self, other: "BitRow") -> None:
        if not isinstance(other, BitRow):
            raise TypeError(f"expected BitRow, got {type(other).__name__}")
        if other.d != self.d:
            raise DimensionError(f"dimension mismatch: {self.d} vs {other.d}")

    def __or__(self, other: "BitRow") -> "BitRow":
        self._check(other)
        return BitRow(self.words | other.words, self.d)

    def __and__(self, other: "BitRow") -> "BitRow":
        self._check(other)
        return BitRow(self.words & other.words, self.d)

    def __invert__(self) -> "BitRow":
        return BitRow(~self.words & live_mask(self.d), self.d)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BitRow):
            return NotImplemented
        return self.d == other.d and bool(np.array_equal(self.words, other.words))

    def __hash__(self) -> int:
        return hash((self.d, self.words.tobytes()))

    def __str__(self) -> str:
        return "".join(map(str, self.to_bits()))

    def __repr__(self) -> str:
        return f"BitRow('{self}')"


def violation_count(row_a: BitRow, row_b: BitRow) -> int:
    """Number of positions where ``a`` is 0 and ``b`` is 1."""
    row_a._check(row_b)
    return int(popcount(~row_a.words & row_b.words).sum())


def hamming_distance(row_a: BitRow, row_b: BitRow) -> int:
    row_a._check(row_b)
    return int(popcount(row_a.words ^ row_b.words).sum())


def bitwise_or(row_a: BitRow, row_b: BitRow) -> BitRow:
    return row_a | row_b


def bitwise_and(row_a: BitRow, row_b: BitRow) -> BitRow:
    return row_a & row_b


class EmbeddingMatrix:
    """``n`` concepts by ``d`` bits, packed row-major into uint64 words."""

    def __init__(self, words: np.ndarray, d: int):
        words = np.ascontiguousarray(words, dtype=np.uint64)
        if words.ndim != 2 or words.shape[0] < 1 or d < 1:
            raise DimensionError("embedding needs n >= 1 rows and d >= 1 bits")
        if words.shape[1] != n_words(d):
            raise DimensionError(f"{words.shape[1]} words per row cannot hold {d} bits")
        if np.any(words & ~live_mask(d)):
            raise ValueError("padding bits must be zero")
        self.words = words
        self.d = d

    @classmethod
    def zeros(cls, n: int, d: int) -> "EmbeddingMatrix":
        if n < 1 or d < 1:
            raise DimensionError("embedding needs n >= 1 rows and d >= 1 bits")
        return cls(np.zeros((n, n_words(d)), dtype=np.uint64), d)

    @classmethod
    def from_bits(cls, bits) -> "EmbeddingMatrix":
        bits = np.asarray(bits, dtype=np.uint8)
        if bits.ndim != 2:
            raise DimensionError("expected a 2-D bit array")
        return cls(pack_bits(bits), bits.shape[1])

    @classmethod
    def random(cls, n: int, d: int, rng: np.random.Generator, density: float = 0.5):
        return cls.from_bits(rng.random((n, d)) < density)

    @property
    def n(self) -> int:
        return self.words.shape[0]

    def _check_id(self, w: int) -> int:
        if not 0 <= w < self.n:
            raise IndexError(f"concept id {w} out of range [0, {self.n})")
        return int(w)

    def row(self, w: int) -> BitRow:
        return BitRow(self.words[self._check_id(w)], self.d)

    def rows(self) -> list[BitRow]:
        return [BitRow(r, self.d) for r in self.words]

    def set_row(self, w: int, row: BitRow) -> None:
        if row.d != self.d:
            raise DimensionError(f"dimension mismatch: {self.d} vs {row.d}")
        self.words[self._check_id(w)] = row.words

    def get_bit(self, w: int, j: int) -> int:
        if not 0 <= j < self.d:
            raise IndexError(f"bit {j} out of range [0, {self.d})")
        word = self.words[self._check_id(w), j // WORD_BITS]
        return int((int(word) >> (j % WORD_BITS)) & 1)

    def flip(self, w: int, j: int) -> None:
        if not 0 <= j < self.d:
            raise IndexError(f"bit {j} out of range [0, {self.d})")
        self.words[self._check_id(w), j // WORD_BITS] ^= np.uint64(1 << (j % WORD_BITS))

    def to_bits(self) -> np.ndarray:
        return unpack_bits(self.words, self.d)

    def copy(self) -> "EmbeddingMatrix":
        return EmbeddingMatrix(self.words.copy(), self.d)

    def padding_clear(self) -> bool:
        return not np.any(self.words & ~live_mask(self.d))

    @property
    def nbytes(self) -> int:
        return self.words.nbytes

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EmbeddingMatrix):
            return NotImplemented
        return self.d == other.d and np.array_equal(self.words, other.words)

    def __repr__(self) -> str:
        return f"EmbeddingMatrix(n={self.n}, d={self.d})"


def predicts_isa(matrix: EmbeddingMatrix, a: int, b: int) -> bool:
    """True when every 1-bit of ``b`` is also set in ``a`` and ``a != b``."""
    wa = matrix.words[matrix._check_id(a)]
    wb = matrix.words[matrix._check_id(b)]
    if a == b:
        return False
    return not np.any(~wa & wb)


@dataclass
class Vocabulary:
    """Bijection between concept names and dense ids ``0..n-1``."""

    names: list[str] = field(default_factory=list)
    index: dict[str, int] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self.index:
            self.index = {}
            for s in self.names:
                if s in self.index:
                    raise ValueError(f"duplicate concept name {s!r}")
                self.index[s] = len(self.index)

    @classmethod
    def from_names(cls, names: Iterable[str]) -> "Vocabulary":
        return cls(list(names))

    def add(self, name: str) -> int:
        """Id of ``name``, appending it if new."""
        i = self.index.get(name)
        if i is None:
            i = self.index[name] = len(self.names)
            self.names.append(name)
        return i

    def id(self, name: str) -> int:
        try:
            return self.index[name]
        except KeyError:
            raise UnknownConceptError(name) from None

    def name(self, i: int) -> str:
        return self.names[i]

    def __contains__(self, name: object) -> bool:
        return name in self.index

    def __len__(self) -> int:
        return len(self.names)

    def __iter__(self):
        return iter(self.names)


def as_pairs(pairs) -> np.ndarray:
    """Normalize a pair collection to a contiguous ``(m, 2)`` int64 array."""
    arr = np.asarray(pairs, dtype=np.int64)
    if arr.size == 0:
        return np.zeros((0, 2), dtype=np.int64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"expected (m, 2) pairs, got shape {arr.shape}")
    return np.ascontiguousarray(arr)


class PairIndex:
    """Membership structure over a set of ordered id pairs.

    Holds a CSR layout (sorted tails per head) for the compiled kernels, the
    sorted ``head * n + tail`` keys for vectorized lookups, and, when ``n`` is
    small enough, a dense bitmap.
    """

    def __init__(self, pairs, n: int):
        pairs = as_pairs(pairs)
        self.n = int(n)
        keys = np.unique(pairs[:, 0] * self.n + pairs[:, 1]) if len(pairs) else np.zeros(0, np.int64)
        self.keys = keys.astype(np.int64)
        heads = self.keys // self.n
        self.indices = np.ascontiguousarray(self.keys % self.n, dtype=np.int64)
        counts = np.bincount(heads, minlength=self.n)
        self.indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(counts, out=self.indptr[1:])
        # non-reflexive members per head / tail, to spot ids with no free partner
        off = heads != self.indices
        self.head_counts = np.bincount(heads[off], minlength=self.n).astype(np.int64)
        self.tail_counts = np.bincount(self.indices[off], minlength=self.n).astype(np.int64)
        self.use_bitmap = self.n * self.n <= BITMAP_LIMIT
        if self.use_bitmap:
            self.bitmap = np.zeros(max(1, (self.n * self.n + 63) // 64), dtype=np.uint64)
            if len(self.keys):
                np.bitwise_or.at(
                    self.bitmap,
                    self.keys >> 6,
                    np.left_shift(np.uint64(1), (self.keys & 63).astype(np.uint64)),
                )
        else:
            self.bitmap = np.zeros(1, dtype=np.uint64)

    def saturated_heads(self) -> np.ndarray:
        """Ids ``a`` for which every ``(a, r)`` with ``r != a`` is a member."""
        return self.head_counts >= self.n - 1

    def saturated_tails(self) -> np.ndarray:
        return self.tail_counts >= self.n - 1

    def contains(self, heads, tails) -> np.ndarray:
        k = np.asarray(heads, dtype=np.int64) * self.n + np.asarray(tails, dtype=np.int64)
        if not len(self.keys):
            return np.zeros(k.shape, dtype=bool)
        pos = np.minimum(np.searchsorted(self.keys, k), len(self.keys) - 1)
        return self.keys[pos] == k

    def pairs(self) -> np.ndarray:
        return np.stack([self.keys // self.n, self.keys % self.n], axis=1)

    def __contains__(self, pair) -> bool:
        a, b = pair
        return bool(self.contains([a], [b])[0])

    def __len__(self) -> int:
        return len(self.keys)

"""Lattice queries over a trained embedding.

Rows are read as attribute sets.  ``meet`` (bitwise OR) builds the more
specific concept that has the attributes of both arguments, ``join``
(bitwise AND) the more general one that keeps only the shared attributes.
A join is only meaningful for concepts that sit close together in the
hierarchy; nothing here checks that.

Query expressions accept concept names, literal bit strings of length ``d``
and the forms ``meet(x, y)``, ``join(x, y)`` and ``complement(x)``.
"""

from __future__ import annotations

import re

import numpy as np

from .core import BitRow, EmbeddingMatrix, Vocabulary, live_mask
from .errors import ConfigError, DimensionError

OPERATORS = {"meet": 2, "join": 2, "complement": 1}


def _row(B: EmbeddingMatrix, x: int | BitRow) -> BitRow:
    if isinstance(x, BitRow):
        if x.d != B.d:
            raise DimensionError(f"query has {x.d} bits, embedding has {B.d}")
        return x
    return B.row(x)


def meet(B: EmbeddingMatrix, a: int | BitRow, b: int | BitRow) -> BitRow:
    """Bitwise OR: the common hyponym with every attribute of ``a`` and ``b``."""
    return _row(B, a) | _row(B, b)


def join(B: EmbeddingMatrix, a: int | BitRow, b: int | BitRow) -> BitRow:
    """Bitwise AND: the common hypernym keeping only shared attributes."""
    return _row(B, a) & _row(B, b)


def complement(B: EmbeddingMatrix, a: int | BitRow) -> BitRow:
    return ~_row(B, a)


def _matches(B: EmbeddingMatrix, mask: np.ndarray, query: BitRow, include_self: bool) -> set[int]:
    if not include_self:
        mask &= ~np.all(B.words == query.words, axis=1)
    return set(np.flatnonzero(mask).tolist())


def hyponyms_of(B: EmbeddingMatrix, query: int | BitRow, include_self: bool = False) -> set[int]:
    """Concepts whose rows contain every 1-bit of ``query``.

    Rows identical to the query are left out unless ``include_self`` is set.
    """
    q = _row(B, query)
    return _matches(B, ~np.any(~B.words & q.words, axis=1), q, include_self)


def hypernyms_of(B: EmbeddingMatrix, query: int | BitRow, include_self: bool = False) -> set[int]:
    """Concepts whose 1-bits all appear in ``query``."""
    q = _row(B, query)
    inv = ~q.words & live_mask(B.d)
    return _matches(B, ~np.any(B.words & inv, axis=1), q, include_self)


_TOKEN = re.compile(r"\s*(?:([(),])|([^\s(),]+))")


def _tokenize(text: str) -> list[str]:
    tokens, pos = [], 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ConfigError(f"cannot parse query at {text[pos:]!r}")
        tokens.append(m.group(1) or m.group(2))
        pos = m.end()
    return tokens


def resolve(B: EmbeddingMatrix, vocab: Vocabulary, expr: str | int | BitRow) -> BitRow:
    """Evaluate a query expression to a bit row.

    Names take precedence over bit literals, so a concept called ``"0110"``
    still resolves to its own row.
    """
    if not isinstance(expr, str):
        return _row(B, expr)
    tokens = _tokenize(expr)
    if not tokens:
        raise ConfigError("empty query")
    row, pos = _parse(B, vocab, tokens, 0)
    if pos != len(tokens):
        raise ConfigError(f"unexpected {tokens[pos]!r} in query {expr!r}")
    return row


def _parse(B, vocab, tokens, pos) -> tuple[BitRow, int]:
    tok = tokens[pos]
    if tok in "(),":
        raise ConfigError(f"unexpected {tok!r} in query")
    nxt = tokens[pos + 1] if pos + 1 < len(tokens) else None
    if nxt == "(" and tok.lower() in OPERATORS:
        arity = OPERATORS[tok.lower()]
        args, pos = [], pos + 2
        for k in range(arity):
            if k:
                if pos >= len(tokens) or tokens[pos] != ",":
                    raise ConfigError(f"{tok} takes {arity} arguments")
                pos += 1
            if pos >= len(tokens):
                raise ConfigError("query ends early")
            row, pos = _parse(B, vocab, tokens, pos)
            args.append(row)
        if pos >= len(tokens) or tokens[pos] != ")":
            raise ConfigError(f"{tok} takes {arity} arguments")
        op = {"meet": meet, "join": join, "complement": complement}[tok.lower()]
        return op(B, *args), pos + 1
    if tok in vocab:
        return B.row(vocab.id(tok)), pos + 1
    if set(tok) <= {"0", "1"}:
        if len(tok) != B.d:
            raise DimensionError(f"bit literal has {len(tok)} bits, embedding has {B.d}")
        return BitRow.from_bits(tok), pos + 1
    return B.row(vocab.id(tok)), pos + 1  # raises UnknownConceptError

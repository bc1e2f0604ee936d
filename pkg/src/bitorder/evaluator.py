"""Confusion counts and F1 for held-out pairs and the full adjacency matrix."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from . import kernels
from .core import EmbeddingMatrix, PairIndex, as_pairs


@dataclass(frozen=True)
class Confusion:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 0.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0

    def __add__(self, other: "Confusion") -> "Confusion":
        return Confusion(self.tp + other.tp, self.fp + other.fp,
                         self.fn + other.fn, self.tn + other.tn)

    def to_record(self, mode: str) -> dict:
        return {"mode": mode, **asdict(self), "precision": self.precision,
                "recall": self.recall, "f1": f1(self)}


def f1(c: Confusion) -> float:
    """``2 tp / (2 tp + fp + fn)``, or 0 when nothing was predicted or expected."""
    denom = 2 * c.tp + c.fp + c.fn
    return 2 * c.tp / denom if denom else 0.0


def _predicted(B: EmbeddingMatrix, pairs: np.ndarray, threads: int = 1) -> np.ndarray:
    if not len(pairs):
        return np.zeros(0, dtype=bool)
    h = np.ascontiguousarray(pairs[:, 0])
    t = np.ascontiguousarray(pairs[:, 1])
    return (kernels.violation_counts(B.words, h, t, threads) == 0) & (h != t)


def evaluate_pairs(B: EmbeddingMatrix, positives, negatives, threads: int = 1) -> Confusion:
    pos = _predicted(B, as_pairs(positives), threads)
    neg = _predicted(B, as_pairs(negatives), threads)
    tp = int(pos.sum())
    fp = int(neg.sum())
    return Confusion(tp=tp, fp=fp, fn=len(pos) - tp, tn=len(neg) - fp)


def evaluate_full_adjacency(B: EmbeddingMatrix, closure, threads: int = 1) -> Confusion:
    """Score every ordered pair ``a != b``, labelled positive iff it is in ``closure``."""
    if not isinstance(closure, PairIndex):
        closure = PairIndex(closure, B.n)
    return Confusion(*kernels.full_adjacency(B.words, closure, threads))

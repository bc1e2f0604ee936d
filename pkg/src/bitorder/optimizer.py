"""Integer loss and gradient, flip probabilities, and the training loop.

The gradient ``delta[w, j]`` of a state is defined so that flipping bit
``(w, j)`` alone changes the loss by exactly ``-delta[w, j]``.  It is
accumulated in int64; probabilities are derived from it in float64.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, TextIO

import numpy as np

from . import kernels, rng
from .core import EmbeddingMatrix, PairIndex, Vocabulary, as_pairs
from .dataset import REPRESENTATION, SplitBundle
from .errors import ConfigError
from .evaluator import evaluate_full_adjacency, evaluate_pairs, f1

FIX, PROTECT, IGNORE = "fix", "protect", "ignore"


def _cols(pairs) -> tuple[np.ndarray, np.ndarray]:
    pairs = as_pairs(pairs)
    return np.ascontiguousarray(pairs[:, 0]), np.ascontiguousarray(pairs[:, 1])


def _check_ids(B: EmbeddingMatrix, *pair_sets: np.ndarray) -> None:
    for pairs in pair_sets:
        if len(pairs) and (pairs.min() < 0 or pairs.max() >= B.n):
            raise IndexError(f"pair ids must lie in [0, {B.n})")


def loss(B: EmbeddingMatrix, P, N, alpha: int = 1, beta: int = 1) -> tuple[int, int]:
    """Weighted count of violated positive bits and of unseparated negative pairs."""
    P, N = as_pairs(P), as_pairs(N)
    _check_ids(B, P, N)
    loss_p = int(kernels.violation_counts(B.words, *_cols(P)).sum()) if len(P) else 0
    loss_n = int(np.count_nonzero(kernels.violation_counts(B.words, *_cols(N)) == 0)) if len(N) else 0
    return alpha * loss_p, beta * loss_n


def positive_gradient(B: EmbeddingMatrix, P) -> np.ndarray:
    P = as_pairs(P)
    _check_ids(B, P)
    out = np.zeros((B.n, B.d), dtype=np.int64)
    kernels.accumulate_positive(B.words, B.d, *_cols(P), 1, out)
    return out


def negative_gradient(B: EmbeddingMatrix, N) -> np.ndarray:
    N = as_pairs(N)
    _check_ids(B, N)
    out = np.zeros((B.n, B.d), dtype=np.int64)
    kernels.accumulate_negative(B.words, B.d, *_cols(N), 1, out)
    return out


def gradient(B: EmbeddingMatrix, P, N, alpha: int = 1, beta: int = 1) -> np.ndarray:
    """``alpha * positive_gradient + beta * negative_gradient`` in one pass."""
    P, N = as_pairs(P), as_pairs(N)
    _check_ids(B, P, N)
    out = np.zeros((B.n, B.d), dtype=np.int64)
    kernels.accumulate_positive(B.words, B.d, *_cols(P), alpha, out)
    kernels.accumulate_negative(B.words, B.d, *_cols(N), beta, out)
    return out


@dataclass(frozen=True)
class PairAudit:
    good_bit_count: int

    @property
    def branch(self) -> str:
        if self.good_bit_count == 0:
            return FIX
        return PROTECT if self.good_bit_count == 1 else IGNORE


def audit_negatives(B: EmbeddingMatrix, N) -> list[PairAudit]:
    N = as_pairs(N)
    _check_ids(B, N)
    return [PairAudit(int(g)) for g in kernels.violation_counts(B.words, *_cols(N))]


def flip_probabilities(delta: np.ndarray, lr: float, bias: float) -> np.ndarray:
    """``max(0, tanh(2 (lr * delta + bias)) / 2)`` elementwise, in float64."""
    p = 0.5 * np.tanh(2.0 * (lr * np.asarray(delta, dtype=np.float64) + bias))
    return np.ascontiguousarray(np.maximum(p, 0.0))


def apply_flips(B: EmbeddingMatrix, prob: np.ndarray, seed: int, epoch: int,
                threads: int = 1) -> tuple[EmbeddingMatrix, int]:
    """Return a copy of ``B`` with each bit flipped independently with its probability."""
    prob = np.ascontiguousarray(prob, dtype=np.float64)
    if prob.shape != (B.n, B.d):
        raise ConfigError(f"probability shape {prob.shape} does not match ({B.n}, {B.d})")
    out = B.copy()
    count = _flip_inplace(out, prob, seed, epoch, threads)
    return out, count


def _flip_inplace(B: EmbeddingMatrix, prob: np.ndarray, seed: int, epoch: int, threads: int = 1) -> int:
    key = rng.stream_key(seed, epoch, rng.STREAM_FLIP)
    return int(kernels.apply_flips(B.words, B.d, prob, key, threads))


@dataclass
class TrainConfig:
    d: int = 128
    alpha: int = 25
    beta: int = 10
    n_minus: int = 32
    lr: float = 0.008
    bias: float = 0.01
    max_epochs: int = 10000
    early_stop_width: int = 500
    seed: int = 0
    eval_every: int = 1
    # validate on the full adjacency instead of the sampled (val_pos, val_neg)
    full_validation: bool = False
    threads: int = 1

    def validate(self) -> None:
        if self.d < 1:
            raise ConfigError("d must be >= 1")
        if self.alpha < 0 or self.beta < 0:
            raise ConfigError("alpha and beta must be non-negative integers")
        if int(self.alpha) != self.alpha or int(self.beta) != self.beta:
            raise ConfigError("alpha and beta must be integers")
        if self.n_minus < 2 or self.n_minus % 2:
            raise ConfigError(f"negative multiplier must be even and >= 2, got {self.n_minus}")
        if self.lr <= 0:
            raise ConfigError("learning rate must be positive")
        if self.bias < 0:
            raise ConfigError("learning bias must be non-negative")
        if self.max_epochs < 1 or self.early_stop_width < 1 or self.eval_every < 1:
            raise ConfigError("max_epochs, early_stop_width and eval_every must be >= 1")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")


@dataclass
class EpochRecord:
    epoch: int
    loss_p: int
    loss_n: int
    val_f1: float | None
    bits_flipped: int
    elapsed_ms: float


@dataclass
class TrainReport:
    best_embedding: EmbeddingMatrix
    best_f1: float
    history: list[EpochRecord] = field(default_factory=list)
    stopped_epoch: int = 0

    @property
    def f1_history(self) -> list[float]:
        return [r.val_f1 for r in self.history if r.val_f1 is not None]


def should_stop(f1s: list[float], width: int) -> bool:
    """Early exit when the older window's mean is at least the newer window's."""
    if len(f1s) < 2 * width:
        return False
    old = np.mean(f1s[-2 * width : -width])
    new = np.mean(f1s[-width:])
    return bool(old >= new)


class Trainer:
    """Stateful form of :func:`train`, exposing one epoch at a time."""

    def __init__(self, n: int, bundle: SplitBundle, config: TrainConfig):
        config.validate()
        self.config = config
        self.bundle = bundle
        self.train_pos = as_pairs(bundle.train_pos)
        if not len(self.train_pos):
            raise ConfigError("training set has no positive pairs")
        if n < 2:
            raise ConfigError("need at least two concepts")
        self.n = n
        self.B = EmbeddingMatrix.zeros(n, config.d)
        _check_ids(self.B, self.train_pos)
        self.heads, self.tails = _cols(self.train_pos)
        # training negatives only avoid known training positives
        self.forbidden = PairIndex(self.train_pos, n)
        self.val_pos = as_pairs(bundle.val_pos)
        self.val_neg = as_pairs(bundle.val_neg)
        self._full = PairIndex(bundle.closure(), n) if config.full_validation else None
        self.epoch = 0

    def step(self) -> tuple[int, int, int]:
        """One gradient-and-flip epoch; returns ``(loss_p, loss_n, bits_flipped)``."""
        cfg = self.config
        self.epoch += 1
        delta = np.zeros((self.n, cfg.d), dtype=np.int64)
        violations = kernels.accumulate_positive(
            self.B.words, cfg.d, self.heads, self.tails, cfg.alpha, delta)
        key = rng.stream_key(cfg.seed, self.epoch, rng.STREAM_NEGATIVE)
        unseparated, _ = kernels.negative_epoch(
            self.B.words, cfg.d, self.heads, self.tails, self.n, cfg.n_minus,
            self.forbidden, key, cfg.beta, delta)
        prob = flip_probabilities(delta, cfg.lr, cfg.bias)
        flipped = _flip_inplace(self.B, prob, cfg.seed, self.epoch, cfg.threads)
        return cfg.alpha * int(violations), cfg.beta * int(unseparated), flipped

    def validation_f1(self) -> float:
        if self._full is not None:
            c = evaluate_full_adjacency(self.B, self._full, threads=self.config.threads)
        else:
            c = evaluate_pairs(self.B, self.val_pos, self.val_neg)
        return f1(c)


def train(vocab: Vocabulary | int, bundle: SplitBundle, config: TrainConfig, *,
          metrics: TextIO | None = None,
          on_epoch: Callable[[EpochRecord], None] | None = None) -> TrainReport:
    """Learn an embedding from the zero matrix, keeping the best validation state.

    Each epoch draws fresh negatives, computes the integer gradient, converts
    it to flip probabilities and flips bits.  Validation F1 is recorded every
    ``eval_every`` epochs; training stops early once the mean of the last
    ``early_stop_width`` recorded scores no longer exceeds the mean of the
    window before it.
    """
    n = vocab if isinstance(vocab, int) else len(vocab)
    trainer = Trainer(n, bundle, config)
    best = trainer.B.copy()
    best_f1 = 0.0
    f1s: list[float] = []
    history: list[EpochRecord] = []
    start = time.perf_counter()
    stopped = config.max_epochs
    for epoch in range(1, config.max_epochs + 1):
        loss_p, loss_n, flipped = trainer.step()
        val = None
        if epoch % config.eval_every == 0 or epoch == config.max_epochs:
            val = trainer.validation_f1()
            if val > best_f1:
                best, best_f1 = trainer.B.copy(), val
            f1s.append(val)
        record = EpochRecord(epoch, loss_p, loss_n, val, flipped,
                             round((time.perf_counter() - start) * 1000, 3))
        history.append(record)
        if metrics is not None:
            metrics.write(json.dumps(asdict(record)) + "\n")
        if on_epoch is not None:
            on_epoch(record)
        if val is not None and should_stop(f1s, config.early_stop_width):
            stopped = epoch
            break
    return TrainReport(best_embedding=best, best_f1=best_f1, history=history, stopped_epoch=stopped)


def hill_climb(B: EmbeddingMatrix, P, N, alpha: int = 1, beta: int = 1,
               max_steps: int | None = None) -> tuple[EmbeddingMatrix, list[int]]:
    """Sequential single-bit descent with zero bias.

    Repeatedly flips the first bit with a positive gradient until none is
    left.  Returns the final state and the loss trace (one entry per state).
    """
    B = B.copy()
    trace = [sum(loss(B, P, N, alpha, beta))]
    steps = 0
    while max_steps is None or steps < max_steps:
        delta = gradient(B, P, N, alpha, beta)
        pos = np.flatnonzero(delta > 0)
        if not len(pos):
            break
        w, j = divmod(int(pos[0]), B.d)
        B.flip(w, j)
        trace.append(sum(loss(B, P, N, alpha, beta)))
        steps += 1
    return B, trace

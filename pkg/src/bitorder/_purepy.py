"""Numpy implementations of the hot kernels.

Used when the compiled extension is unavailable or ``BITORDER_PURE=1`` is
set.  Results are bit-identical to ``_kernels``; only speed differs.
``threads`` arguments are accepted for signature parity and ignored.
"""

from __future__ import annotations

import numpy as np

from . import rng
from .core import PairIndex, live_mask, pack_bits, popcount, unpack_bits

CHUNK = 1 << 16


def violation_counts(words, heads, tails, threads=1):
    heads = np.asarray(heads, dtype=np.int64)
    tails = np.asarray(tails, dtype=np.int64)
    out = np.empty(len(heads), dtype=np.int64)
    for s in range(0, len(heads), CHUNK):
        h, t = heads[s : s + CHUNK], tails[s : s + CHUNK]
        out[s : s + CHUNK] = popcount(~words[h] & words[t]).sum(axis=1)
    return out


def accumulate_positive(words, d, heads, tails, weight, out):
    """Add ``weight`` times the positive-pair gradient into ``out``.

    Returns the unweighted number of violating bit positions.
    """
    heads = np.asarray(heads, dtype=np.int64)
    tails = np.asarray(tails, dtype=np.int64)
    loss = 0
    for s in range(0, len(heads), CHUNK):
        h, t = heads[s : s + CHUNK], tails[s : s + CHUNK]
        a = unpack_bits(words[h], d).astype(np.int64)
        b = unpack_bits(words[t], d).astype(np.int64)
        loss += int(((1 - a) * b).sum())
        np.add.at(out, h, weight * (b * (1 - 2 * a)))
        np.add.at(out, t, weight * ((1 - a) * (2 * b - 1)))
    return loss


def accumulate_negative(words, d, heads, tails, weight, out):
    """Add ``weight`` times the negative-pair gradient into ``out``.

    Returns the number of pairs with no (0, 1) position.
    """
    heads = np.asarray(heads, dtype=np.int64)
    tails = np.asarray(tails, dtype=np.int64)
    violated = 0
    # pairs with two or more good bits contribute nothing
    live = violation_counts(words, heads, tails) <= 1
    heads, tails = heads[live], tails[live]
    for s in range(0, len(heads), CHUNK):
        h, t = heads[s : s + CHUNK], tails[s : s + CHUNK]
        a = unpack_bits(words[h], d).astype(np.int64)
        b = unpack_bits(words[t], d).astype(np.int64)
        good = b * (1 - a)
        g = good.sum(axis=1, keepdims=True)
        zero = g == 0
        one = g == 1
        violated += int(zero.sum())
        ga = np.where(zero, a * b, 0) - np.where(one, good, 0)
        gb = np.where(zero, (1 - a) * (1 - b), 0) - np.where(one, good, 0)
        np.add.at(out, h, weight * ga)
        np.add.at(out, t, weight * gb)
    return violated


def sample_negatives(heads, tails, n, n_minus, forbidden: PairIndex, key, threads=1):
    """Corrupt each positive ``n_minus`` times; see ``dataset.sample_negatives``."""
    heads = np.asarray(heads, dtype=np.int64)
    tails = np.asarray(tails, dtype=np.int64)
    m = len(heads)
    slots = np.arange(m * n_minus, dtype=np.int64)
    src = slots // n_minus
    left = (slots % n_minus) < n_minus // 2
    out_h = np.full(len(slots), -1, dtype=np.int64)
    out_t = np.full(len(slots), -1, dtype=np.int64)
    # slots whose fixed endpoint admits no valid corruption can never succeed
    dead = np.where(left, forbidden.saturated_tails()[tails[src]], forbidden.saturated_heads()[heads[src]])
    pending = slots[~dead]
    for attempt in range(rng.MAX_RESAMPLE):
        if not len(pending):
            break
        r = rng.below(key, pending * rng.MAX_RESAMPLE + attempt, n)
        ph = np.where(left[pending], r, heads[src[pending]])
        pt = np.where(left[pending], tails[src[pending]], r)
        ok = (ph != pt) & ~forbidden.contains(ph, pt)
        out_h[pending[ok]] = ph[ok]
        out_t[pending[ok]] = pt[ok]
        pending = pending[~ok]
    keep = out_h >= 0
    return out_h[keep], out_t[keep]


def negative_epoch(words, d, heads, tails, n, n_minus, forbidden, key, weight, out):
    """Sample negatives and accumulate their gradient in one pass.

    Returns ``(violated, sampled)``.
    """
    nh, nt = sample_negatives(heads, tails, n, n_minus, forbidden, key)
    return accumulate_negative(words, d, nh, nt, weight, out), len(nh)


def apply_flips(words, d, prob, key, threads=1):
    """Flip bit ``(w, j)`` when its uniform draw is below ``prob[w, j]``."""
    n = words.shape[0]
    counters = np.arange(n * d, dtype=np.uint64).reshape(n, d)
    flips = rng.uniforms(key, counters) < prob
    words ^= pack_bits(flips) & live_mask(d)
    return int(flips.sum())


def full_adjacency(words, closure: PairIndex, threads=1):
    """Confusion counts over all ordered pairs ``a != b``."""
    n = words.shape[0]
    tp = fp = fn = 0
    for a in range(n):
        pred = ~np.any(~words[a] & words, axis=1)
        pred[a] = False
        label = np.zeros(n, dtype=bool)
        label[closure.indices[closure.indptr[a] : closure.indptr[a + 1]]] = True
        tp += int(np.count_nonzero(pred & label))
        fp += int(np.count_nonzero(pred & ~label))
        fn += int(np.count_nonzero(~pred & label))
    tn = n * (n - 1) - tp - fp - fn
    return tp, fp, fn, tn

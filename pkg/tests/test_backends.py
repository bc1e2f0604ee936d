"""The compiled kernels and the numpy fallback must agree bit for bit."""

import numpy as np
import pytest

from bitorder import _purepy, kernels, rng
from bitorder.core import PairIndex

compiled = kernels.compiled()
pytestmark = pytest.mark.skipif(compiled is None, reason="compiled extension not built")


def instance(seed):
    g = np.random.default_rng(seed)
    n = int(g.integers(2, 60))
    d = int(g.choice([1, 7, 63, 64, 65, 130]))
    bits = g.random((n, d)) < g.uniform(0.1, 0.9)
    from bitorder.core import pack_bits
    words = pack_bits(bits)
    P = np.unique(g.integers(0, n, (int(g.integers(1, 4 * n)), 2)), axis=0)
    P = P[P[:, 0] != P[:, 1]]
    if not len(P):
        P = np.array([[0, 1]])
    if seed % 4 == 0:  # a root that every other concept points at
        P = np.unique(np.vstack([P, [[r, 0] for r in range(1, n)]]), axis=0)
    return g, n, d, words, P


@pytest.mark.parametrize("seed", range(40))
def test_kernels_agree(seed, monkeypatch):
    g, n, d, words, P = instance(seed)
    if seed % 3 == 0:
        monkeypatch.setattr("bitorder.core.BITMAP_LIMIT", 1)
    idx = PairIndex(P, n)
    h, t = np.ascontiguousarray(P[:, 0]), np.ascontiguousarray(P[:, 1])
    key = rng.stream_key(seed, 5, rng.STREAM_NEGATIVE)
    n_minus = int(g.choice([2, 4, 10]))

    assert np.array_equal(compiled.violation_counts(words, h, t, 2), _purepy.violation_counts(words, h, t))

    a, b = compiled.sample_negatives(h, t, n, n_minus, idx, key, 2), _purepy.sample_negatives(h, t, n, n_minus, idx, key)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])

    outs = [np.zeros((n, d), dtype=np.int64) for _ in range(4)]
    assert compiled.accumulate_positive(words, d, h, t, 25, outs[0]) == \
        _purepy.accumulate_positive(words, d, h, t, 25, outs[1])
    assert np.array_equal(outs[0], outs[1])
    r1 = compiled.negative_epoch(words, d, h, t, n, n_minus, idx, key, 10, outs[2])
    r2 = _purepy.negative_epoch(words, d, h, t, n, n_minus, idx, key, 10, outs[3])
    assert r1 == r2 and np.array_equal(outs[2], outs[3])

    prob = np.ascontiguousarray(g.uniform(0, 0.5, (n, d)) * (g.random((n, d)) < 0.7))
    fkey = rng.stream_key(seed, 5, rng.STREAM_FLIP)
    w1, w2 = words.copy(), words.copy()
    assert compiled.apply_flips(w1, d, prob, fkey, 2) == _purepy.apply_flips(w2, d, prob, fkey)
    assert np.array_equal(w1, w2)

    assert compiled.full_adjacency(words, idx, 2) == _purepy.full_adjacency(words, idx)


def test_thread_count_does_not_change_results():
    g, n, d, words, P = instance(1)
    idx = PairIndex(P, n)
    h, t = np.ascontiguousarray(P[:, 0]), np.ascontiguousarray(P[:, 1])
    prob = np.full((n, d), 0.25)
    key = rng.stream_key(0, 1, rng.STREAM_FLIP)
    results = []
    for threads in (1, 2, 4):
        w = words.copy()
        compiled.apply_flips(w, d, prob, key, threads)
        results.append((w.tobytes(), compiled.full_adjacency(words, idx, threads),
                        compiled.sample_negatives(h, t, n, 4, idx, key, threads)[0].tobytes()))
    assert results[0] == results[1] == results[2]

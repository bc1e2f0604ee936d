import io
import json
import math

import numpy as np
import pytest

from bitorder import dataset as ds
from bitorder import optimizer as op
from bitorder.core import EmbeddingMatrix
from bitorder.errors import ConfigError

from oracles import dense_loss, flip_deltas, random_instance


def M(rows):
    return EmbeddingMatrix.from_bits(np.array([[int(c) for c in r] for r in rows]))


def test_loss_examples():
    Z = EmbeddingMatrix.zeros(4, 5)
    assert op.loss(Z, [[0, 1], [2, 3]], [], 25, 10) == (0, 0)
    N = [[0, 1], [1, 2], [3, 0]]
    assert op.loss(Z, [], N, 1, 10) == (0, 30)
    assert op.loss(M(["01", "11"]), [[0, 1]], [], 2, 1) == (2, 0)
    with pytest.raises(IndexError):
        op.loss(Z, [[0, 9]], [])


@pytest.mark.parametrize("a,b,expect", [
    ("0", "1", (1, 1)),   # flip either
    ("1", "1", (-1, 0)),  # protect a
    ("0", "0", (0, -1)),  # protect b
    ("1", "0", (0, 0)),   # don't care
])
def test_positive_truth_table(a, b, expect):
    g = op.positive_gradient(M([a, b]), [[0, 1]])
    assert (g[0, 0], g[1, 0]) == expect


def test_positive_gradient_additive():
    B = M(["0110", "1100", "0011"])
    one = op.positive_gradient(B, [[0, 1]])
    assert np.array_equal(op.positive_gradient(B, [[0, 1], [0, 1]]), 2 * one)
    P1, P2 = [[0, 1], [2, 1]], [[1, 2], [0, 2]]
    assert np.array_equal(op.positive_gradient(B, P1 + P2),
                          op.positive_gradient(B, P1) + op.positive_gradient(B, P2))


def test_negative_truth_table_fix_branch():
    # G = 0 pair: bits (1,1) at j=0 and (0,0) at j=1, (1,0) at j=2
    g = op.negative_gradient(M(["100", "100"][:1] + ["100"]), [[0, 1]])
    B = M(["101", "100"])
    g = op.negative_gradient(B, [[0, 1]])
    assert g[0].tolist() == [1, 0, 0]
    assert g[1].tolist() == [0, 1, 0]


def test_negative_protect_and_ignore():
    B = M(["1000", "1100"])  # good bit only at j=1
    g = op.negative_gradient(B, [[0, 1]])
    assert g[0].tolist() == [0, -1, 0, 0] and g[1].tolist() == [0, -1, 0, 0]
    B = M(["0000", "1110"])  # G = 3
    assert not op.negative_gradient(B, [[0, 1]]).any()


def test_pair_audit_branches():
    B = M(["11", "01", "00", "11"])
    audits = op.audit_negatives(B, [[0, 1], [2, 1], [2, 3]])
    assert [a.good_bit_count for a in audits] == [0, 1, 2]
    assert [a.branch for a in audits] == [op.FIX, op.PROTECT, op.IGNORE]


def test_gradient_degree_bound():
    g = np.random.default_rng(3)
    for _ in range(50):
        bits, P, N, alpha, beta = random_instance(g)
        B = EmbeddingMatrix.from_bits(bits)
        delta = op.gradient(B, P, N, alpha, beta)
        degP = np.bincount(P.ravel(), minlength=B.n)
        degN = np.bincount(N.ravel(), minlength=B.n)
        assert np.all(np.abs(delta) <= (alpha * degP + beta * degN)[:, None])


def test_gradient_matches_brute_force_small():
    g = np.random.default_rng(11)
    for _ in range(100):
        bits, P, N, alpha, beta = random_instance(g, 8, 6)
        delta = op.gradient(EmbeddingMatrix.from_bits(bits), P, N, alpha, beta)
        assert np.array_equal(-delta, flip_deltas(bits, P, N, alpha, beta))
        lp, ln = op.loss(EmbeddingMatrix.from_bits(bits), P, N, alpha, beta)
        assert lp + ln == dense_loss(bits, P, N, alpha, beta)


def test_flip_probability_examples():
    p = op.flip_probabilities(np.array([[-10**6, 0, 10**6]]), 0.008, 0.01)
    assert p[0, 0] == 0.0
    assert p[0, 2] == pytest.approx(0.5, abs=1e-12)
    assert p[0, 1] == pytest.approx(0.5 * math.tanh(0.02), rel=1e-15)
    # tanh series x - x^3/3 + 2x^5/15 at x = 0.02, halved
    x = 0.02
    assert p[0, 1] == pytest.approx((x - x**3 / 3 + 2 * x**5 / 15) / 2, abs=1e-12)
    assert p[0, 1] == pytest.approx(0.00999867, abs=5e-9)
    q = op.flip_probabilities(np.arange(-500, 500).reshape(10, 100), 0.008, 0.0)
    assert q.min() >= 0 and q.max() <= 0.5


def test_apply_flips_examples():
    B = EmbeddingMatrix.random(50, 70, np.random.default_rng(0))
    out, k = op.apply_flips(B, np.zeros((50, 70)), seed=1, epoch=1)
    assert k == 0 and out == B
    p = np.full((50, 70), 0.3)
    a, ka = op.apply_flips(B, p, seed=4, epoch=2)
    b, kb = op.apply_flips(B, p, seed=4, epoch=2)
    assert a == b and ka == kb
    assert int((a.to_bits() != B.to_bits()).sum()) == ka
    c, _ = op.apply_flips(B, p, seed=4, epoch=3)
    assert c != a
    with pytest.raises(ConfigError):
        op.apply_flips(B, np.zeros((2, 2)), 0, 0)


def test_apply_flips_binomial_concentration():
    # 10^6 bits at p = 0.5: count within 5 standard deviations (sigma = 500)
    B = EmbeddingMatrix.zeros(1000, 1000)
    p = np.full((1000, 1000), 0.5)
    for seed in range(5):
        _, k = op.apply_flips(B, p, seed=seed, epoch=0)
        assert abs(k - 500_000) <= 5 * math.sqrt(0.25 * 10**6)


def test_config_validation():
    op.TrainConfig(beta=0, bias=0.0).validate()  # ablation settings are legal
    for bad in (dict(n_minus=3), dict(d=0), dict(lr=0), dict(bias=-1), dict(max_epochs=0),
                dict(early_stop_width=0), dict(alpha=1.5), dict(alpha=-1), dict(threads=0)):
        with pytest.raises(ConfigError):
            op.TrainConfig(**bad).validate()


def test_should_stop_windows():
    assert not op.should_stop([0.5] * 3, 2)
    assert op.should_stop([0.5, 0.6, 0.5, 0.6], 2)      # equal means stop
    assert not op.should_stop([0.5, 0.6, 0.6, 0.7], 2)
    assert op.should_stop([0.1, 0.2, 0.9, 0.9, 0.3, 0.4], 2)
    assert not op.should_stop([0.9, 0.9, 0.1, 0.2, 0.3, 0.4], 2)  # only the last 2w count


def _toy(toy_path):
    vocab, pairs = ds.read_edges(toy_path)
    closure = ds.transitive_closure(pairs, len(vocab))
    return vocab, closure, ds.make_split(closure, len(vocab), "repr", 100, seed=0)


def test_train_single_epoch(toy_path):
    vocab, _, bundle = _toy(toy_path)
    buf = io.StringIO()
    report = op.train(vocab, bundle, op.TrainConfig(d=8, max_epochs=1), metrics=buf)
    assert len(report.history) == 1 and report.stopped_epoch == 1
    rec = json.loads(buf.getvalue())
    assert set(rec) == {"epoch", "loss_p", "loss_n", "val_f1", "bits_flipped", "elapsed_ms"}
    # from the zero matrix every positive is satisfied and every negative violated
    assert rec["loss_p"] == 0 and rec["loss_n"] > 0


def test_train_report_invariants(toy_path):
    vocab, _, bundle = _toy(toy_path)
    cfg = op.TrainConfig(d=8, max_epochs=300, early_stop_width=20, eval_every=3, seed=2)
    report = op.train(vocab, bundle, cfg)
    assert report.best_f1 == max(report.f1_history)
    assert all((r.val_f1 is not None) == (r.epoch % 3 == 0 or r.epoch == 300) for r in report.history)
    assert report.stopped_epoch == len(report.history)
    again = op.train(vocab, bundle, cfg)
    assert again.best_embedding == report.best_embedding
    assert [r.loss_n for r in again.history] == [r.loss_n for r in report.history]


def test_train_rejects_empty(toy_path):
    bundle = ds.SplitBundle(train_pos=np.zeros((0, 2), dtype=np.int64))
    with pytest.raises(ConfigError):
        op.train(5, bundle, op.TrainConfig(d=4))


def test_zero_bias_local_optimum_does_not_move():
    # 5-node chain; hill climb to a fixpoint, then a full epoch step flips nothing
    P = ds.transitive_closure([[0, 1], [1, 2], [2, 3], [3, 4]], 5)
    N = [[1, 0], [2, 1], [3, 2], [4, 3], [4, 0]]
    B0 = EmbeddingMatrix.random(5, 6, np.random.default_rng(0))
    B, trace = op.hill_climb(B0, P, N, 3, 2)
    delta = op.gradient(B, P, N, 3, 2)
    assert delta.max() <= 0
    prob = op.flip_probabilities(delta, 0.008, 0.0)
    out, k = op.apply_flips(B, prob, seed=0, epoch=1)
    assert k == 0 and out == B
    assert all(x >= y for x, y in zip(trace, trace[1:]))

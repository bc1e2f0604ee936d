import numpy as np
import pytest
from hypothesis import given, strategies as st

from bitorder import dataset as ds
from bitorder.core import EmbeddingMatrix
from bitorder.evaluator import Confusion, evaluate_full_adjacency, evaluate_pairs, f1

from conftest import TOY_EMBEDDING, matrix_from_rows


def test_f1_examples():
    assert f1(Confusion(tp=1)) == 1.0
    assert f1(Confusion(tp=1, fp=1, fn=1)) == 0.5
    assert f1(Confusion()) == 0


@given(st.integers(0, 50), st.integers(0, 50), st.integers(0, 50), st.integers(0, 50))
def test_f1_properties(tp, fp, fn, tn):
    assert f1(Confusion(tp, fp, fn, tn)) == f1(Confusion(tp, fp, fn, 0))
    assert f1(Confusion(tp + 1, fp, fn)) >= f1(Confusion(tp, fp, fn))


def test_evaluate_pairs_examples():
    Z = EmbeddingMatrix.zeros(4, 3)
    c = evaluate_pairs(Z, [[0, 1], [1, 2]], [[2, 0], [3, 1], [0, 3]])
    assert (c.tp, c.fn, c.fp, c.tn) == (2, 0, 3, 0)
    B = EmbeddingMatrix.from_bits([[0, 1], [1, 0]])
    c = evaluate_pairs(B, [[0, 1]], [])
    assert (c.tp, c.fn) == (0, 1)
    assert c.total == 1


def test_full_adjacency_two_nodes():
    B = EmbeddingMatrix.from_bits([[1, 1], [1, 0]])
    c = evaluate_full_adjacency(B, [[0, 1]])
    assert (c.tp, c.fp, c.fn, c.tn) == (1, 0, 0, 1)


def test_reference_toy_embedding_is_perfect(toy_path):
    vocab, pairs = ds.read_edges(toy_path)
    closure = ds.transitive_closure(pairs, len(vocab))
    B, _ = matrix_from_rows(TOY_EMBEDDING, vocab.names)
    c = evaluate_full_adjacency(B, closure)
    assert c.fp == 0 and c.fn == 0 and f1(c) == 1.0
    assert c.total == 15 * 14


@given(st.integers(2, 12), st.integers(1, 70), st.integers(0, 2**31))
def test_full_adjacency_equals_materialized(n, d, seed):
    g = np.random.default_rng(seed)
    B = EmbeddingMatrix.random(n, d, g, density=g.uniform(0.2, 0.9))
    closure = np.unique(g.integers(0, n, (2 * n, 2)), axis=0)
    closure = closure[closure[:, 0] != closure[:, 1]]
    every = [(a, b) for a in range(n) for b in range(n) if a != b]
    cset = {tuple(p) for p in closure.tolist()}
    pos = [p for p in every if p in cset]
    neg = [p for p in every if p not in cset]
    assert evaluate_full_adjacency(B, closure) == evaluate_pairs(B, pos, neg)


def test_confusion_record():
    rec = Confusion(3, 1, 1, 5).to_record("heldout")
    assert rec == {"mode": "heldout", "tp": 3, "fp": 1, "fn": 1, "tn": 5,
                   "precision": 0.75, "recall": 0.75, "f1": 0.75}
    assert Confusion(1, 2, 3, 4) + Confusion(1, 1, 1, 1) == Confusion(2, 3, 4, 5)

"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--edges tests/data/animals.tsv] [--dim 128]

Both backends run on the same inputs; results are checked for equality
before timings are reported.
"""

from __future__ import annotations

import argparse
import statistics
import time
from pathlib import Path

import numpy as np

from bitorder import _purepy, dataset, kernels, rng
from bitorder.core import EmbeddingMatrix, PairIndex

ROOT = Path(__file__).resolve().parents[1]


def timed(fn, repeat):
    times, out = [], None
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - start)
    return statistics.median(times), out


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--edges", default=str(ROOT / "tests" / "data" / "animals.tsv"))
    ap.add_argument("--dim", type=int, default=128)
    ap.add_argument("--neg-mult", type=int, default=32)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    compiled = kernels.compiled()
    if compiled is None:
        raise SystemExit("compiled extension is not built; nothing to compare")
    vocab, pairs = dataset.read_edges(args.edges)
    n, d = len(vocab), args.dim
    closure = dataset.transitive_closure(pairs, n, vocab.names)
    index = PairIndex(closure, n)
    h, t = np.ascontiguousarray(closure[:, 0]), np.ascontiguousarray(closure[:, 1])
    words = EmbeddingMatrix.random(n, d, np.random.default_rng(0), density=0.3).words
    prob = np.full((n, d), 0.01)
    nkey = rng.stream_key(0, 1, rng.STREAM_NEGATIVE)
    fkey = rng.stream_key(0, 1, rng.STREAM_FLIP)
    th = args.threads

    def cases(mod, threaded):
        extra = (th,) if threaded else ()
        return {
            "violation_counts": lambda: mod.violation_counts(words, h, t, *extra).sum(),
            "accumulate_positive": lambda: mod.accumulate_positive(
                words, d, h, t, 25, np.zeros((n, d), dtype=np.int64)),
            "negative_epoch": lambda: mod.negative_epoch(
                words, d, h, t, n, args.neg_mult, index, nkey, 10, np.zeros((n, d), dtype=np.int64)),
            "apply_flips": lambda: mod.apply_flips(words.copy(), d, prob, fkey, *extra),
            "full_adjacency": lambda: mod.full_adjacency(words, index, *extra),
        }

    print(f"{n} concepts, {len(closure)} positives, d={d}, n_minus={args.neg_mult}, threads={th}")
    print(f"{'kernel':<22}{'compiled ms':>14}{'numpy ms':>12}{'speedup':>10}")
    fast, slow = cases(compiled, True), cases(_purepy, False)
    for name in fast:
        tc, rc = timed(fast[name], args.repeat)
        tp, rp = timed(slow[name], 1 if name == "full_adjacency" else args.repeat)
        assert rc == rp, f"{name}: backends disagree"
        print(f"{name:<22}{1000 * tc:>14.1f}{1000 * tp:>12.1f}{tp / tc:>9.1f}x")


if __name__ == "__main__":
    main()

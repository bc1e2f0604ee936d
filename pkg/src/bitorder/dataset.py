"""Edge-list ingestion, closure/reduction, experiment splits and negative sampling.

Pair collections are ``(m, 2)`` int64 arrays of ``(hyponym, hypernym)`` ids.
"""

from __future__ import annotations

import io
import json
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, TextIO

import numpy as np

from . import kernels, rng
from .core import PairIndex, Vocabulary, as_pairs
from .errors import ConfigError, CycleError, DataError, FormatError, NotClosedError, ParseError

REPRESENTATION = "representation"
LINK_PREDICTION = "link-prediction"
MODES = (REPRESENTATION, LINK_PREDICTION)
LP_PERCENTS = (0, 10, 25, 50)

_MODE_ALIASES = {"repr": REPRESENTATION, "lp": LINK_PREDICTION}


def normalize_mode(mode: str) -> str:
    mode = _MODE_ALIASES.get(mode, mode)
    if mode not in MODES:
        raise ConfigError(f"unknown mode {mode!r}; expected one of {MODES}")
    return mode


def parse_edges(stream: TextIO | Iterable[str], vocab: Vocabulary | None = None,
                dedupe: bool = True):
    """Read ``child<TAB>parent`` lines into a vocabulary and a pair array.

    Blank lines and lines starting with ``#`` are skipped; reflexive edges are
    dropped, as are repeated edges unless ``dedupe`` is false.  Names are
    interned in first-appearance order.
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    vocab = Vocabulary() if vocab is None else vocab
    seen: set[tuple[int, int]] = set()
    pairs: list[tuple[int, int]] = []
    saw_edge = False
    for lineno, line in enumerate(stream, 1):
        line = line.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 2 or not fields[0] or not fields[1]:
            raise ParseError(f"expected 'child<TAB>parent', got {line!r}", lineno)
        saw_edge = True
        a, b = vocab.add(fields[0]), vocab.add(fields[1])
        if a == b or (dedupe and (a, b) in seen):
            continue
        seen.add((a, b))
        pairs.append((a, b))
    if not saw_edge:
        raise DataError("edge list is empty")
    return vocab, as_pairs(pairs)


def read_edges(path: str | Path, vocab: Vocabulary | None = None):
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_edges(fh, vocab)


def write_pairs(path: str | Path, pairs, vocab: Vocabulary) -> None:
    names = vocab.names
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for a, b in as_pairs(pairs):
            fh.write(f"{names[a]}\t{names[b]}\n")


def _parents(pairs: np.ndarray, n: int) -> list[list[int]]:
    parents: list[list[int]] = [[] for _ in range(n)]
    for a, b in pairs.tolist():
        parents[a].append(b)
    return parents


def topological_order(pairs, n: int, names: list[str] | None = None) -> list[int]:
    """Order ids so that every hypernym precedes its hyponyms.

    Raises :class:`CycleError` naming one member of a cycle.
    """
    pairs = as_pairs(pairs)
    parents = _parents(pairs, n)
    children: list[list[int]] = [[] for _ in range(n)]
    indeg = np.zeros(n, dtype=np.int64)
    for a, b in pairs.tolist():
        if a == b:
            continue
        children[b].append(a)
        indeg[a] += 1
    queue = deque(int(v) for v in np.flatnonzero(indeg == 0))
    order = []
    while queue:
        v = queue.popleft()
        order.append(v)
        for c in children[v]:
            indeg[c] -= 1
            if indeg[c] == 0:
                queue.append(c)
    if len(order) < n:
        # walk parent links inside the unresolved set until a node repeats
        left = set(np.flatnonzero(indeg > 0).tolist())
        v = next(iter(left))
        visited = set()
        while v not in visited:
            visited.add(v)
            v = next(p for p in parents[v] if p in left)
        raise CycleError(names[v] if names else str(v))
    return order


def _ancestor_sets(pairs: np.ndarray, n: int, names=None) -> list[set[int]]:
    parents = _parents(pairs, n)
    anc: list[set[int]] = [set() for _ in range(n)]
    for v in topological_order(pairs, n, names):
        s = anc[v]
        for p in parents[v]:
            if p != v:
                s.add(p)
                s |= anc[p]
    return anc


def _sorted_pairs(sets: list[set[int]] | list[list[int]]) -> np.ndarray:
    rows = [(a, b) for a, bs in enumerate(sets) for b in sorted(bs)]
    return as_pairs(rows)


def transitive_closure(pairs, n: int, names: list[str] | None = None) -> np.ndarray:
    """All pairs implied by composition, sorted by (hyponym, hypernym), no self-pairs."""
    return _sorted_pairs(_ancestor_sets(as_pairs(pairs), n, names))


def classify_edges(closure, n: int | None = None):
    """Split a closed pair set into direct and indirect edges.

    ``(a, b)`` is direct when no ``c`` has both ``(a, c)`` and ``(c, b)``.
    """
    closure = as_pairs(closure)
    if n is None:
        n = int(closure.max()) + 1 if len(closure) else 0
    anc = _ancestor_sets(closure, n)
    given = PairIndex(closure, max(n, 1))
    if sum(map(len, anc)) != len(given):
        raise NotClosedError("pair set is not transitively closed")
    direct_sets = []
    for a in range(n):
        covered: set[int] = set()
        for c in anc[a]:
            covered |= anc[c]
        direct_sets.append(anc[a] - covered)
    direct = _sorted_pairs(direct_sets)
    is_direct = PairIndex(direct, max(n, 1)).contains(closure[:, 0], closure[:, 1])
    return direct, closure[~is_direct]


def drop_root(vocab: Vocabulary, pairs, root: str, keep_concept: bool = False):
    """Remove every pair touching ``root``; by default also drop it and recompact ids."""
    r = vocab.id(root)
    pairs = as_pairs(pairs)
    pairs = pairs[(pairs[:, 0] != r) & (pairs[:, 1] != r)]
    if keep_concept:
        return Vocabulary(list(vocab.names)), pairs
    names = [s for i, s in enumerate(vocab.names) if i != r]
    remap = np.arange(len(vocab), dtype=np.int64)
    remap[r + 1 :] -= 1
    return Vocabulary(names), as_pairs(remap[pairs])


def sample_negatives(positives, forbidden, n_vocab: int, n_minus: int, seed: int, epoch: int = 0,
                     threads: int = 1) -> np.ndarray:
    """Corrupt every positive ``n_minus`` times.

    The first ``n_minus / 2`` corruptions of a positive ``(a, b)`` replace the
    hyponym (``(r, b)``), the rest replace the hypernym (``(a, r)``), with
    ``r`` uniform over the vocabulary.  Reflexive or forbidden candidates are
    redrawn up to 100 times and then skipped.  Output is a pure function of
    ``(seed, epoch)`` and the inputs, ordered by positive then corruption slot.
    """
    if n_minus < 2 or n_minus % 2:
        raise ConfigError(f"negative multiplier must be even and >= 2, got {n_minus}")
    if n_vocab < 2:
        raise ConfigError("cannot sample negatives from a vocabulary of one concept")
    positives = as_pairs(positives)
    if not isinstance(forbidden, PairIndex):
        forbidden = PairIndex(forbidden, n_vocab)
    key = rng.stream_key(seed, epoch, rng.STREAM_NEGATIVE)
    h, t = kernels.sample_negatives(
        np.ascontiguousarray(positives[:, 0]), np.ascontiguousarray(positives[:, 1]),
        n_vocab, n_minus, forbidden, key, threads,
    )
    return as_pairs(np.stack([h, t], axis=1))


def sample_nonedges(n: int, count: int, forbidden: PairIndex, gen: np.random.Generator) -> np.ndarray:
    """``count`` ordered pairs drawn uniformly (with replacement) outside ``forbidden``."""
    total = n * (n - 1) - len(forbidden)
    if count and total <= 0:
        raise DataError("no ordered pairs remain outside the positive closure")
    out = np.zeros((0, 2), dtype=np.int64)
    while len(out) < count:
        want = 2 * (count - len(out)) + 16
        a = gen.integers(0, n, want)
        b = gen.integers(0, n, want)
        ok = (a != b) & ~forbidden.contains(a, b)
        out = np.concatenate([out, np.stack([a[ok], b[ok]], axis=1)])
    return as_pairs(out[:count])


def _empty() -> np.ndarray:
    return np.zeros((0, 2), dtype=np.int64)


@dataclass
class SplitBundle:
    """Training positives plus frozen validation/test pairs for one configuration.

    In representation mode the test set is the full adjacency matrix and is
    left empty here; the evaluator walks it lazily.
    """

    train_pos: np.ndarray
    val_pos: np.ndarray = field(default_factory=_empty)
    val_neg: np.ndarray = field(default_factory=_empty)
    test_pos: np.ndarray = field(default_factory=_empty)
    test_neg: np.ndarray = field(default_factory=_empty)
    mode: str = REPRESENTATION
    tc_percent: int = 100
    neg_ratio: int = 10
    split_seed: int = 0
    val_fraction: float = 0.5

    def closure(self) -> np.ndarray:
        """The full positive set this split was built from."""
        if self.mode == REPRESENTATION:
            return self.train_pos
        both = np.concatenate([self.train_pos, self.val_pos, self.test_pos])
        return PairIndex(both, int(both.max()) + 1 if len(both) else 1).pairs()

    def counts(self) -> dict[str, int]:
        return {
            name: len(getattr(self, name))
            for name in ("train_pos", "val_pos", "val_neg", "test_pos", "test_neg")
        }

    def manifest(self) -> dict:
        return {
            "mode": self.mode,
            "tc_percent": self.tc_percent,
            "neg_ratio": self.neg_ratio,
            "seed": self.split_seed,
            "val_fraction": self.val_fraction,
            "counts": self.counts(),
        }


def make_split(closure, n: int, mode: str = LINK_PREDICTION, tc_percent: int = 0,
               neg_ratio: int = 10, seed: int = 0, val_fraction: float = 0.5) -> SplitBundle:
    """Build a train/validation/test split from a transitively closed pair set."""
    mode = normalize_mode(mode)
    if mode == LINK_PREDICTION and tc_percent not in LP_PERCENTS:
        raise ConfigError(f"link prediction takes tc_percent in {LP_PERCENTS}, got {tc_percent}")
    if mode == REPRESENTATION and tc_percent != 100:
        raise ConfigError(f"representation mode trains on the full closure (tc_percent=100), got {tc_percent}")
    if neg_ratio < 1:
        raise ConfigError("neg_ratio must be >= 1")
    if not 0.0 <= val_fraction <= 1.0:
        raise ConfigError("val_fraction must lie in [0, 1]")
    closure = PairIndex(closure, n).pairs()
    full = PairIndex(closure, n)
    gen = np.random.default_rng(seed)
    common = dict(mode=mode, tc_percent=tc_percent, neg_ratio=neg_ratio, split_seed=seed,
                  val_fraction=val_fraction)

    if mode == REPRESENTATION:
        val_neg = sample_nonedges(n, neg_ratio * len(closure), full, gen)
        return SplitBundle(train_pos=closure, val_pos=closure.copy(), val_neg=val_neg, **common)

    direct, indirect = classify_edges(closure, n)
    indirect = indirect[gen.permutation(len(indirect))]
    n_train = int(round(len(indirect) * tc_percent / 100))
    held = indirect[n_train:]
    n_val = int(len(held) * val_fraction)
    train = PairIndex(np.concatenate([direct, indirect[:n_train]]), n).pairs()
    val_pos = PairIndex(held[:n_val], n).pairs()
    test_pos = PairIndex(held[n_val:], n).pairs()
    negs = sample_nonedges(n, neg_ratio * (len(val_pos) + len(test_pos)), full, gen)
    k = neg_ratio * len(val_pos)
    return SplitBundle(train_pos=train, val_pos=val_pos, val_neg=negs[:k],
                       test_pos=test_pos, test_neg=negs[k:], **common)


SPLIT_FILES = ("train_pos", "val_pos", "val_neg", "test_pos", "test_neg")


def write_split(directory: str | Path, bundle: SplitBundle, vocab: Vocabulary) -> None:
    """Write a split as TSV files, ``vocab.txt`` and ``manifest.json``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "vocab.txt").write_text("".join(f"{s}\n" for s in vocab.names), encoding="utf-8")
    for name in SPLIT_FILES:
        write_pairs(directory / f"{name}.tsv", getattr(bundle, name), vocab)
    manifest = bundle.manifest()
    manifest["n_concepts"] = len(vocab)
    (directory / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")


def read_vocab(path: str | Path) -> Vocabulary:
    text = Path(path).read_text(encoding="utf-8")
    return Vocabulary(text.splitlines())


def read_split(directory: str | Path):
    """Inverse of :func:`write_split`; returns ``(vocab, bundle)``."""
    directory = Path(directory)
    try:
        manifest = json.loads((directory / "manifest.json").read_text(encoding="utf-8"))
        vocab = read_vocab(directory / "vocab.txt")
    except FileNotFoundError as exc:
        raise FormatError(f"not a split directory: {exc}") from None
    n = len(vocab)
    parts = {}
    for name in SPLIT_FILES:
        path = directory / f"{name}.tsv"
        if not path.exists():
            parts[name] = _empty()
            continue
        before = len(vocab)
        text = path.read_text(encoding="utf-8")
        if not text.strip():
            parts[name] = _empty()
            continue
        _, parts[name] = parse_edges(io.StringIO(text), vocab, dedupe=False)
        if len(vocab) != before:
            raise FormatError(f"{path.name} names concepts missing from vocab.txt")
    assert len(vocab) == n
    bundle = SplitBundle(
        mode=manifest["mode"],
        tc_percent=manifest["tc_percent"],
        neg_ratio=manifest["neg_ratio"],
        split_seed=manifest["seed"],
        val_fraction=manifest.get("val_fraction", 0.5),
        **parts,
    )
    return vocab, bundle

"""Command-line interface: ``bitorder {closure,split,train,eval,query}``.

Exit codes are 0 on success, 2 for invalid options or configuration and 3
for unusable input data.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import algebra, dataset, kernels, persistence
from .core import predicts_isa
from .errors import ConfigError, DataError, DimensionError
from .evaluator import evaluate_full_adjacency, evaluate_pairs
from .optimizer import TrainConfig, train

EXIT_CONFIG = 2
EXIT_DATA = 3


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def cmd_closure(args) -> int:
    vocab, pairs = dataset.read_edges(args.input)
    if args.drop_root:
        vocab, pairs = dataset.drop_root(vocab, pairs, args.drop_root)
    closure = dataset.transitive_closure(pairs, len(vocab), vocab.names)
    direct, indirect = dataset.classify_edges(closure, len(vocab))
    names = vocab.names
    order = sorted(range(len(closure)), key=lambda i: (names[closure[i, 0]], names[closure[i, 1]]))
    dataset.write_pairs(args.out, closure[order], vocab)
    _log(f"{len(vocab)} concepts, {len(direct)} direct, {len(indirect)} indirect, "
         f"{len(closure)} closure edges")
    return 0


def cmd_split(args) -> int:
    vocab, pairs = dataset.read_edges(args.closure)
    n = len(vocab)
    closure = dataset.transitive_closure(pairs, n, vocab.names)
    if len(closure) != len(pairs):
        raise DataError(f"{args.closure} is not transitively closed "
                        f"({len(pairs)} edges, closure has {len(closure)}); run 'closure' first")
    mode = dataset.normalize_mode(args.mode)
    tc = args.tc_pct
    if tc is None:
        tc = 100 if mode == dataset.REPRESENTATION else 0
    bundle = dataset.make_split(closure, n, mode, tc, args.neg_ratio, args.seed, args.val_fraction)
    dataset.write_split(args.out, bundle, vocab)
    _log(json.dumps(bundle.counts()))
    return 0


def _final_metrics(B, bundle, threads: int) -> dict:
    if bundle.mode == dataset.REPRESENTATION:
        return evaluate_full_adjacency(B, bundle.closure(), threads).to_record("full")
    return evaluate_pairs(B, bundle.test_pos, bundle.test_neg, threads).to_record("heldout")


def cmd_train(args) -> int:
    vocab, bundle = dataset.read_split(args.split)
    cfg = TrainConfig(d=args.dim, alpha=args.alpha, beta=args.beta, n_minus=args.neg_mult,
                      lr=args.lr, bias=args.bias, max_epochs=args.epochs,
                      early_stop_width=args.early_stop_width, seed=args.seed,
                      eval_every=args.eval_every, full_validation=args.full_validation,
                      threads=args.threads)
    cfg.validate()
    start = time.perf_counter()
    metrics = open(args.metrics, "w", encoding="utf-8") if args.metrics else None
    try:
        report = train(vocab, bundle, cfg, metrics=metrics)
    finally:
        if metrics is not None:
            metrics.close()
    wall = time.perf_counter() - start
    B = report.best_embedding
    persistence.save_embedding(args.out, B, vocab)
    final = _final_metrics(B, bundle, cfg.threads)
    manifest = {
        "config": asdict(cfg),
        "split": {"path": str(Path(args.split).resolve()), **bundle.manifest()},
        "model": str(Path(args.out).resolve()),
        "backend": kernels.BACKEND,
        "results": {"best_val_f1": report.best_f1, "stopped_epoch": report.stopped_epoch,
                    "wall_seconds": round(wall, 3), "test": final},
    }
    persistence.write_manifest(persistence.manifest_path(args.out), manifest)
    print(json.dumps(final))
    return 0


def _load_model_for(model: str, vocab):
    B, mvocab = persistence.load_embedding(model)
    if mvocab is not None and mvocab.names != vocab.names:
        raise DataError(f"{model} was trained on a different vocabulary than the split")
    if B.n != len(vocab):
        raise DataError(f"{model} has {B.n} rows but the split has {len(vocab)} concepts")
    return B


def cmd_eval(args) -> int:
    vocab, bundle = dataset.read_split(args.split)
    B = _load_model_for(args.model, vocab)
    mode = args.mode or ("full" if bundle.mode == dataset.REPRESENTATION else "heldout")
    if mode == "full":
        c = evaluate_full_adjacency(B, bundle.closure(), args.threads)
    else:
        if not len(bundle.test_pos) and not len(bundle.test_neg):
            raise ConfigError("split has no held-out test pairs; use --mode full")
        c = evaluate_pairs(B, bundle.test_pos, bundle.test_neg, args.threads)
    print(json.dumps(c.to_record(mode)))
    return 0


def cmd_query(args) -> int:
    B, vocab = persistence.load_embedding(args.model, require_vocab=True)
    names = vocab.names
    if args.isa:
        a, b = (vocab.id(x) for x in args.isa)
        value = bool(predicts_isa(B, a, b))
        result = {"query": "isa", "args": args.isa, "result": value}
        text = "true" if value else "false"
    elif args.meet or args.join:
        op, (x, y) = ("meet", args.meet) if args.meet else ("join", args.join)
        row = getattr(algebra, op)(B, algebra.resolve(B, vocab, x), algebra.resolve(B, vocab, y))
        same = sorted(names[w] for w in algebra.hyponyms_of(B, row, include_self=True)
                      if np.array_equal(B.words[w], row.words))
        result = {"query": op, "args": [x, y], "row": str(row), "matches": same}
        text = str(row) + "".join(f"\n{s}" for s in same)
    else:
        op, expr = ("hyponyms", args.hyponyms) if args.hyponyms else ("hypernyms", args.hypernyms)
        row = algebra.resolve(B, vocab, expr)
        ids = getattr(algebra, f"{op}_of")(B, row, include_self=args.include_self)
        found = sorted(names[w] for w in ids)
        result = {"query": op, "expr": expr, "row": str(row), "result": found}
        text = "\n".join(found)
    print(json.dumps(result) if args.json else text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bitorder", description="Binary order embeddings of is-a hierarchies.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("closure", help="transitive closure of an edge list")
    s.add_argument("--in", dest="input", required=True, help="child<TAB>parent edge file")
    s.add_argument("--out", required=True)
    s.add_argument("--drop-root", metavar="NAME", help="remove this concept and its edges first")
    s.set_defaults(func=cmd_closure)

    s = sub.add_parser("split", help="build a train/validation/test split")
    s.add_argument("--closure", required=True)
    s.add_argument("--mode", choices=["lp", "repr", *dataset.MODES], default="lp")
    s.add_argument("--tc-pct", type=int, default=None,
                   help="percent of transitive edges kept for training (lp: 0/10/25/50)")
    s.add_argument("--neg-ratio", type=int, default=10)
    s.add_argument("--val-fraction", type=float, default=0.5)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_split)

    d = TrainConfig()
    s = sub.add_parser("train", help="train an embedding on a split")
    s.add_argument("--split", required=True)
    s.add_argument("--dim", type=int, default=d.d)
    s.add_argument("--alpha", type=int, default=d.alpha)
    s.add_argument("--beta", type=int, default=d.beta)
    s.add_argument("--neg-mult", type=int, default=d.n_minus)
    s.add_argument("--lr", type=float, default=d.lr)
    s.add_argument("--bias", type=float, default=d.bias)
    s.add_argument("--epochs", type=int, default=d.max_epochs)
    s.add_argument("--early-stop-width", type=int, default=d.early_stop_width)
    s.add_argument("--eval-every", type=int, default=d.eval_every)
    s.add_argument("--full-validation", action="store_true",
                   help="validate on the full adjacency (small graphs)")
    s.add_argument("--seed", type=int, default=d.seed)
    s.add_argument("--threads", type=int, default=d.threads)
    s.add_argument("--out", default="model.bnd")
    s.add_argument("--metrics", help="write per-epoch JSON lines here")
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("eval", help="score a model on a split")
    s.add_argument("--model", required=True)
    s.add_argument("--split", required=True)
    s.add_argument("--mode", choices=["full", "heldout"])
    s.add_argument("--threads", type=int, default=1)
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("query", help="is-a tests and lattice queries")
    s.add_argument("--model", required=True)
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--isa", nargs=2, metavar=("A", "B"))
    g.add_argument("--meet", nargs=2, metavar=("A", "B"))
    g.add_argument("--join", nargs=2, metavar=("A", "B"))
    g.add_argument("--hyponyms", metavar="EXPR")
    g.add_argument("--hypernyms", metavar="EXPR")
    s.add_argument("--include-self", action="store_true")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_query)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, DimensionError) as exc:
        _log(f"error: {exc}")
        return EXIT_CONFIG
    except (DataError, FileNotFoundError, IsADirectoryError) as exc:
        _log(f"error: {exc}")
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())

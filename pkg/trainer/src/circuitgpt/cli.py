"""Trainer command line: train, sample, evaluate."""

import argparse
import json
import sys

from .config import TrainerConfig
from .data import load_records
from .evaluate import evaluate_model
from .generate import generate
from .train import load_checkpoint, train


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="circuitgpt")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train")
    p.add_argument("--train", required=True, help="training JSONL")
    p.add_argument("--val", help="validation JSONL")
    p.add_argument("--out", required=True)
    p.add_argument("--layers", type=int, default=6)
    p.add_argument("--heads", type=int, default=6)
    p.add_argument("--embed-dim", type=int, default=384)
    p.add_argument("--context", type=int, default=1024)
    p.add_argument("--dropout", type=float, default=0.2)
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--lr", type=float, default=3e-4)
    p.add_argument("--iters", type=int, default=2000)
    p.add_argument("--embedding", default="none", choices=["none", "graph"])
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("sample")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--formula", required=True, help="canonical formula text")
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--temperature", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("evaluate")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True, help="JSONL records to evaluate on")
    p.add_argument("--limit", type=int, default=50)
    p.add_argument("--temperature", type=float, default=1.0)
    p.add_argument("--cli", default="mosaic-qaoa")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_evaluate)
    return parser


def cmd_train(args) -> int:
    cfg = TrainerConfig(
        n_layer=args.layers,
        n_head=args.heads,
        n_embd=args.embed_dim,
        context=args.context,
        dropout=args.dropout,
        batch_size=args.batch_size,
        learning_rate=args.lr,
        max_iters=args.iters,
        embedding_mode=args.embedding,
        seed=args.seed,
    )
    result = train(args.train, args.val, cfg, args.out)
    print(
        f"trained {result['model'].parameter_count()} parameters; "
        f"best val loss {result['best_val_loss']:.4f}; checkpoints in {args.out}"
    )
    return 0


def cmd_sample(args) -> int:
    model, vocab, cfg = load_checkpoint(args.checkpoint)
    if cfg.embedding_mode != "none":
        print("graph-embedding checkpoints need a dataset record; "
              "use the evaluate command", file=sys.stderr)
        return 1
    sequences = generate(
        model, vocab, args.formula, args.k, args.temperature, args.seed, cfg=cfg
    )
    for seq in sequences:
        print(" ".join(seq))
    return 0


def cmd_evaluate(args) -> int:
    model, vocab, cfg = load_checkpoint(args.checkpoint)
    records = load_records(args.data)[: args.limit]
    summary = evaluate_model(
        model, vocab, cfg, records,
        cli=args.cli, temperature=args.temperature, seed=args.seed,
    )
    summary.pop("per_formula")
    payload = json.dumps(summary, indent=1)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(payload + "\n")
    print(payload)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry points: train an artifact, serve it, build the toy corpus."""

from __future__ import annotations

import argparse
import logging
import sys

from model_service.errors import ModelServiceError
from model_service.toy import write_toy_corpus
from model_service.train import NAMED_PROFILES, TrainConfig, train


def _train_config(args: argparse.Namespace) -> TrainConfig:
    overrides = {}
    for key in ("learning_rate", "epochs", "batch_size", "seed", "max_length"):
        value = getattr(args, key)
        if value is not None:
            overrides[key] = value
    if args.profile == "toy":
        return TrainConfig.toy(**overrides)
    return TrainConfig.named(args.profile, **overrides)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="tdm-model-service")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fine-tune a classifier on an instance file")
    p.add_argument("--instances", required=True)
    p.add_argument("--out", required=True, help="artifact directory to write")
    p.add_argument("--profile", default="toy", choices=["toy", *NAMED_PROFILES])
    p.add_argument("--learning-rate", type=float, dest="learning_rate")
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", type=int, dest="batch_size")
    p.add_argument("--max-length", type=int, dest="max_length")
    p.add_argument("--seed", type=int)

    p = sub.add_parser("serve", help="serve /score and /health for an artifact")
    p.add_argument("--artifact", required=True)
    p.add_argument("--port", type=int, default=8400)
    p.add_argument("--host", default="127.0.0.1")

    p = sub.add_parser("make-toy-corpus", help="write the synthetic CI corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--papers", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)

    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "train":
            artifact = train(args.instances, _train_config(args), args.out)
            print(f"artifact written to {artifact}")
        elif args.command == "serve":
            from model_service.service import serve

            serve(args.artifact, port=args.port, host=args.host)
        else:
            paths = write_toy_corpus(args.out, papers=args.papers, seed=args.seed)
            print("toy corpus:", ", ".join(str(p) for p in paths.values()))
    except ModelServiceError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

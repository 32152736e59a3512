"""Command line: train a checkpoint, inspect it, serve it.

All diagnostics go to stderr; stdout belongs to the protocol (serve) or
to the requested artifact (info), so the stdio transport stays clean.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from lmserver.model import ToyLMConfig, load_checkpoint, save_checkpoint
from lmserver.server import LMBackend, serve_stdio, serve_tcp
from lmserver.training import train_toy


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lmserver",
        description="toy word-level transformer LM behind a line-based JSON protocol",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="train a checkpoint from a text corpus")
    train.add_argument("corpus", help="text file, one or more sentences per line")
    train.add_argument("-o", "--output", required=True, help="checkpoint path to write")
    train.add_argument("--vocab-size", type=int, default=5000)
    train.add_argument("--embedding-dim", type=int, default=64)
    train.add_argument("--heads", type=int, default=4)
    train.add_argument("--layers", type=int, default=2)
    train.add_argument("--dropout", type=float, default=0.05)
    train.add_argument("--context-len", type=int, default=32)
    train.add_argument("--epochs", type=int, default=8)
    train.add_argument("--batch-size", type=int, default=64)
    train.add_argument("--lr", type=float, default=3e-3)
    train.add_argument("--seed", type=int, default=0)

    info = sub.add_parser("info", help="print checkpoint config, vocab, and history as JSON")
    info.add_argument("--checkpoint", required=True)

    serve = sub.add_parser("serve", help="answer scoring requests from a checkpoint")
    serve.add_argument("--checkpoint", required=True)
    transport = serve.add_mutually_exclusive_group(required=True)
    transport.add_argument("--stdio", action="store_true", help="speak on stdin/stdout")
    transport.add_argument("--port", type=int, help="listen on TCP port (0 = ephemeral)")
    serve.add_argument("--host", default="127.0.0.1")
    return parser


def cmd_train(args) -> int:
    config = ToyLMConfig(
        vocab_size=args.vocab_size,
        embedding_dim=args.embedding_dim,
        heads=args.heads,
        layers=args.layers,
        dropout=args.dropout,
        context_len=args.context_len,
        epochs=args.epochs,
        batch_size=args.batch_size,
        lr=args.lr,
        seed=args.seed,
    )
    with open(args.corpus, "r", encoding="utf-8") as fh:
        result = train_toy(fh, config)
    save_checkpoint(args.output, result.model, result.vocab, result.history)
    logging.getLogger("lmserver").info(
        "saved %s (final held-out ce %.4f)", args.output, result.final_heldout_ce
    )
    return 0


def cmd_info(args) -> int:
    model, vocab, history = load_checkpoint(args.checkpoint)
    blob = {
        "config": {k: getattr(model.config, k) for k in ToyLMConfig.__dataclass_fields__},
        "vocab": list(vocab.words),
        "history": history,
    }
    json.dump(blob, sys.stdout, ensure_ascii=False, indent=1)
    sys.stdout.write("\n")
    return 0


def cmd_serve(args) -> int:
    backend = LMBackend.from_checkpoint(args.checkpoint)
    log = logging.getLogger("lmserver")
    if args.stdio:
        log.info("serving on stdio")
        serve_stdio(backend)
        return 0
    server = serve_tcp(backend, args.host, args.port)
    host, port = server.server_address[:2]
    log.info("serving on %s:%d", host, port)
    try:
        server.serve_forever()
    finally:
        server.server_close()
    return 0


def main(argv=None) -> int:
    logging.basicConfig(
        stream=sys.stderr, level=logging.INFO, format="%(levelname)s %(name)s: %(message)s"
    )
    args = _build_parser().parse_args(argv)
    handlers = {"train": cmd_train, "info": cmd_info, "serve": cmd_serve}
    try:
        return handlers[args.command](args)
    except KeyboardInterrupt:
        return 130
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

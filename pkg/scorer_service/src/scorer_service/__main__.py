"""Command line: serve a model, record fixtures, run the selftest."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import ServiceConfig


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scorer-service",
        description="HTTP scorer sidecar for masked language models")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--model", required=True, help="model path or identifier")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8400)
    serve.add_argument("--max-tokens", type=int, default=512)
    serve.add_argument("--device", default="cpu")

    record = sub.add_parser("record", help="record responses into a table fixture")
    record.add_argument("--endpoint", required=True, help="running service URL")
    record.add_argument("--texts", required=True,
                        help="one sentence per line; lines containing [MASK] "
                             "become fill-mask queries")
    record.add_argument("--top-k", type=int, default=10)
    record.add_argument("--out", required=True)

    selftest = sub.add_parser("selftest", help="replay golden requests and diff")
    selftest.add_argument("--model", required=True)
    selftest.add_argument("--fixture", required=True)
    selftest.add_argument("--record", action="store_true",
                          help="write the golden file instead of diffing")
    selftest.add_argument("--max-tokens", type=int, default=512)
    selftest.add_argument("--device", default="cpu")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "serve":
        import uvicorn

        from .app import create_app
        from .model import MlmScorer

        config = ServiceConfig(model=args.model, host=args.host, port=args.port,
                               max_tokens=args.max_tokens, device=args.device)
        app = create_app(MlmScorer(config))
        uvicorn.run(app, host=config.host, port=config.port, log_level="info")
        return 0

    if args.command == "record":
        from .record import record_fixture, split_corpus_lines, write_fixture

        lines = Path(args.texts).read_text(encoding="utf-8").splitlines()
        texts, masked = split_corpus_lines(lines)
        fixture = record_fixture(args.endpoint, texts, masked, top_k=args.top_k)
        write_fixture(fixture, args.out)
        print(f"recorded {len(texts)} sentences and {len(masked)} mask queries "
              f"to {args.out}")
        return 0

    if args.command == "selftest":
        from .model import MlmScorer
        from .selftest import run_selftest

        config = ServiceConfig(model=args.model, max_tokens=args.max_tokens,
                               device=args.device)
        differences = run_selftest(MlmScorer(config), args.fixture, record=args.record)
        if args.record:
            print(f"golden fixture written to {args.fixture}")
            return 0
        if differences:
            for diff in differences:
                print(f"DIFF {diff}", file=sys.stderr)
            return 1
        print("selftest passed")
        return 0

    return 2


if __name__ == "__main__":
    sys.exit(main())

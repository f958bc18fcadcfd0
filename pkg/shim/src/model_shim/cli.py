"""Serve the shim: `model-shim --port 8700 --gazetteer path/to.tsv`."""
from __future__ import annotations

import argparse
import sys
from typing import Sequence

import uvicorn

from .config import ENDPOINTS, ShimConfig
from .server import create_app


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="model-shim",
        description="Deterministic reference server for the NER/NLI/generation/embedding routes.",
    )
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8700)
    parser.add_argument("--dim", type=int, default=64, help="embedding dimension")
    parser.add_argument("--gazetteer", default="", help="TSV gazetteer (default: bundled)")
    parser.add_argument("--lemma-table", default="", help="TSV lemma table for model-mode providers")
    for name in ENDPOINTS:
        parser.add_argument(
            f"--{name}-mode",
            choices=("deterministic", "model"),
            default="deterministic",
            help=f"mode for /{name}" if name != "generate" else "mode for /v1/chat/completions",
        )
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    config = ShimConfig(
        modes={name: getattr(args, f"{name}_mode") for name in ENDPOINTS},
        port=args.port,
        embed_dim=args.dim,
        gazetteer_path=args.gazetteer,
        lemma_table_path=args.lemma_table,
    )
    # model mode needs providers registered programmatically via create_app
    app = create_app(config)
    uvicorn.run(app, host=args.host, port=config.port, log_level="info")
    return 0


if __name__ == "__main__":
    sys.exit(main())

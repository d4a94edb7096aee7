"""CLI: embed a transcript directory into the 768-column CSV contract."""

from __future__ import annotations

import argparse
import logging
import sys

from .embed import DEFAULT_MODEL, POOLINGS, SidecarError, embed_transcripts


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="embed-sidecar", description=__doc__)
    parser.add_argument("--in", dest="transcripts", required=True,
                        help="directory of <id>.txt transcripts")
    parser.add_argument("--out", required=True, help="output CSV path")
    parser.add_argument("--model", default=DEFAULT_MODEL,
                        help="encoder name or local path (768-d hidden states)")
    parser.add_argument("--pooling", choices=POOLINGS, default="mean")
    parser.add_argument("--batch-size", type=int, default=16)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        n = embed_transcripts(
            args.transcripts,
            args.out,
            model_name_or_path=args.model,
            pooling=args.pooling,
            batch_size=args.batch_size,
        )
    except SidecarError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {n} embedding row(s) to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

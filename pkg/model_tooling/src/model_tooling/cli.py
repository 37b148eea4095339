"""Offline export CLI.

`model-tooling export` loads pretrained weights from a local directory
(transformers format), exports the image encoder as a TorchScript graph and
precomputes the prompt embedding fixture. `model-tooling verify` rechecks a
bundle's integrity manifest.
"""

from __future__ import annotations

import argparse
import sys

from .export import (
    IntegrityError,
    export_encoders,
    load_prompt_file,
    verify_bundle,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="model-tooling",
                                     description="encoder export tooling")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("export", help="export an encoder bundle")
    p.add_argument("--weights", required=True,
                   help="local directory with pretrained weights (transformers format)")
    p.add_argument("--out", required=True, help="bundle output directory")
    p.add_argument("--prompts", default=None,
                   help="tab-separated prompt-pair file; defaults to the built-in pairs")
    p.add_argument("--expected-checksum", default=None,
                   help="sha256 the loaded weights must match")

    p = sub.add_parser("verify", help="recheck a bundle's integrity manifest")
    p.add_argument("--bundle", required=True)

    return parser


def _run(args) -> int:
    if args.command == "export":
        from transformers import AutoTokenizer, CLIPModel

        model = CLIPModel.from_pretrained(args.weights)
        tokenizer = AutoTokenizer.from_pretrained(args.weights)
        prompts = load_prompt_file(args.prompts) if args.prompts else None
        bundle = export_encoders(model, tokenizer, args.out, prompts=prompts,
                                 expected_checksum=args.expected_checksum)
        print(f"exported {bundle.directory}: dim={bundle.embedding_dim} "
              f"resolution={bundle.input_resolution} prompts={bundle.prompt_count}")
        return 0

    if args.command == "verify":
        verify_bundle(args.bundle)
        print(f"{args.bundle}: manifest OK")
        return 0

    raise AssertionError(f"unhandled command {args.command}")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _run(args)
    except (IntegrityError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

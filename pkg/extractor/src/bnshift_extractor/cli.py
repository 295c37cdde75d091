"""Capture CLI: export source BN stats or a two-domain toy stream.

`source` and `stream` rebuild the same deterministically pretrained toy
model from --seed, so their outputs are mutually consistent; `demo` does
both in one run and also writes the ground-truth boundary file.
"""

from __future__ import annotations

import argparse
import json
import sys

import torch

from .capture import CaptureError, capture_stream, export_source_stats
from .models import build_pretrained
from .toydata import batched, corrupt, make_images


def _pretrained(args):
    images, labels = make_images(args.pretrain_images, seed=args.seed)
    return build_pretrained(
        images, labels, epochs=args.epochs, batch_size=args.batch_size, seed=args.seed
    )


def _two_domain_batches(args) -> tuple[list[torch.Tensor], int]:
    images, _ = make_images(args.stream_images, seed=args.seed + 1)
    clean = batched(images, args.batch_size)
    corrupted = batched(corrupt(images, seed=args.seed + 2), args.batch_size)
    return clean + corrupted, len(clean)


def cmd_source(args) -> int:
    model = _pretrained(args)
    schema = export_source_stats(
        model, args.filter, args.out, metadata={"model": args.model, "seed": args.seed}
    )
    print(f"wrote {args.out}: {len(schema)} layers, {sum(schema.values())} channels")
    return 0


def cmd_stream(args) -> int:
    model = _pretrained(args)
    stream, boundary = _two_domain_batches(args)
    count = capture_stream(
        model, stream, args.filter, args.out,
        metadata={"model": args.model, "seed": args.seed, "batch_size": args.batch_size},
    )
    print(f"wrote {args.out}: {count} batches, domain boundary at t={boundary}")
    return 0


def cmd_demo(args) -> int:
    model = _pretrained(args)
    export_source_stats(model, args.filter, args.source,
                        metadata={"model": args.model, "seed": args.seed})
    stream, boundary = _two_domain_batches(args)
    count = capture_stream(model, stream, args.filter, args.out,
                           metadata={"model": args.model, "seed": args.seed,
                                     "batch_size": args.batch_size})
    with open(args.truth, "w", encoding="utf-8") as fh:
        json.dump({"change_points": [boundary],
                   "labels": [[0, "clean"], [boundary, "corrupted"]]}, fh)
        fh.write("\n")
    print(f"wrote {args.source}, {args.out} ({count} batches), {args.truth}"
          f" (boundary t={boundary})")
    return 0


def _add_common(p):
    p.add_argument("--model", default="tinycnn", choices=["tinycnn"])
    p.add_argument("--filter", default="block3", help="BN layer name prefix to capture")
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pretrain-images", type=int, default=1024)
    p.add_argument("--epochs", type=int, default=2)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="bnshift-extract", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("source", help="export stored BN running stats as source.jsonl")
    _add_common(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_source)

    p = sub.add_parser("stream", help="capture the clean-then-corrupted toy stream")
    _add_common(p)
    p.add_argument("--stream-images", type=int, default=1984)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_stream)

    p = sub.add_parser("demo", help="source + stream + ground truth in one run")
    _add_common(p)
    p.add_argument("--stream-images", type=int, default=1984)
    p.add_argument("--source", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--truth", required=True)
    p.set_defaults(func=cmd_demo)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CaptureError as exc:
        print(f"bnshift-extract: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"bnshift-extract: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front door: simulate, detect, eval, sweep, plot.

Exit codes: 0 success, 1 validation or usage error, 2 I/O or file-format
error. Every run is reproducible from its flags plus input files.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from .engine import Engine, EngineConfig
from .errors import BnshiftError, ConfigError, StreamFormatError, ValidationError
from .io import (
    read_events,
    read_ground_truth,
    read_source_stats,
    read_stream,
    read_trace,
    write_events,
    write_ground_truth,
    write_source_stats,
    write_stream,
    write_trace,
)
from .peaks import PeakDetectorConfig
from .plotting import render_trace_svg
from .simeval import EvalConfig, ScenarioConfig, evaluate, generate_scenario, threshold_sweep

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2


class _Parser(argparse.ArgumentParser):
    """argparse defaults to exit code 2 on usage errors; the contract says 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _parse_layers(spec: str, channels: int) -> tuple[tuple[str, int], ...]:
    """Layer spec: an integer count, or comma-separated ids with optional :channels."""
    spec = spec.strip()
    if spec.isdigit():
        return tuple((f"bn{i}", channels) for i in range(int(spec)))
    layers = []
    for part in spec.split(","):
        part = part.strip()
        if not part:
            raise ConfigError(f"empty layer entry in --layers {spec!r}")
        if ":" in part:
            layer_id, _, count = part.partition(":")
            if not count.isdigit() or int(count) < 1:
                raise ConfigError(f"bad channel count in layer entry {part!r}")
            layers.append((layer_id, int(count)))
        else:
            layers.append((part, channels))
    return tuple(layers)


def _engine_config(args) -> EngineConfig:
    return EngineConfig(
        peak=PeakDetectorConfig(
            window_size=args.window, threshold=args.threshold, influence=args.influence
        ),
        layer_filter=args.layer_filter,
        cooldown_batches=getattr(args, "cooldown", 0),
    )


def _add_detector_flags(p: argparse.ArgumentParser, with_threshold: bool = True):
    if with_threshold:
        p.add_argument("--threshold", type=float, default=15.0, help="z-score peak threshold")
    p.add_argument("--window", type=int, default=10, help="sliding window size")
    p.add_argument("--influence", type=float, default=0.1, help="running-stats blend weight")
    p.add_argument("--layer-filter", default=None, help="layer id prefix to restrict momentum to")


def cmd_simulate(args) -> int:
    cfg = ScenarioConfig(
        num_domains=args.domains,
        batches_per_domain=args.batches_per_domain,
        layers=_parse_layers(args.layers, args.channels),
        batch_size=args.batch_size,
        domain_gap=args.gap,
        rng_seed=args.seed,
    )
    source_stats, stream, truth = generate_scenario(cfg)
    metadata = {
        "generator": "bnshift-simulate",
        "num_domains": cfg.num_domains,
        "batches_per_domain": cfg.batches_per_domain,
        "batch_size": cfg.batch_size,
        "domain_gap": cfg.domain_gap,
        "rng_seed": cfg.rng_seed,
    }
    write_source_stats(args.source, source_stats, metadata=metadata)
    count = write_stream(args.out, stream, metadata=metadata)
    write_ground_truth(args.truth, truth)
    print(
        f"wrote {count} batches to {args.out}, {len(truth.change_points)} change points"
        f" to {args.truth}, source stats to {args.source}"
    )
    return EXIT_OK


def cmd_detect(args) -> int:
    source_stats = read_source_stats(args.source)
    header, snapshots = read_stream(args.input)
    src_schema = list(source_stats.schema().items())
    hdr_schema = list(header.schema().items())
    if hdr_schema != src_schema:
        for (sid, sc), (hid, hc) in zip(src_schema, hdr_schema):
            if sid != hid or sc != hc:
                raise ValidationError(
                    f"stream/source schema mismatch at layer {hid!r}"
                    f" ({hc} channels) vs source {sid!r} ({sc} channels)"
                )
        extra = src_schema[len(hdr_schema):] or hdr_schema[len(src_schema):]
        raise ValidationError(
            f"stream/source schema mismatch: layer {extra[0][0]!r} present on one side only"
        )
    engine = Engine(source_stats, _engine_config(args))
    records, events = engine.run_stream(snapshots)
    write_trace(args.trace, records)
    write_events(args.events, events)
    print(f"processed {len(records)} batches, {len(events)} detections")
    for e in events:
        print(f"  detection at t={e.t} (alpha_bar={e.alpha_bar:.4f}, z={e.z_score:.1f})")
    return EXIT_OK


def cmd_eval(args) -> int:
    events = read_events(args.events)
    truth = read_ground_truth(args.truth)
    report = evaluate(events, truth, EvalConfig(tolerance=args.tolerance))
    text = json.dumps(report.to_dict(), indent=2)
    print(text)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    return EXIT_OK


def cmd_sweep(args) -> int:
    try:
        thresholds = [float(x) for x in args.thresholds.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad --thresholds list {args.thresholds!r}: {exc}") from exc
    if not thresholds:
        raise ConfigError("--thresholds must name at least one threshold")
    source_stats = read_source_stats(args.source)
    _, snapshots = read_stream(args.input)
    batches = list(snapshots)
    truth = read_ground_truth(args.truth)
    base = EngineConfig(
        peak=PeakDetectorConfig(window_size=args.window, influence=args.influence),
        layer_filter=args.layer_filter,
    )
    results = threshold_sweep(
        source_stats, batches, truth, thresholds, base, EvalConfig(tolerance=args.tolerance)
    )
    text = json.dumps([r.to_dict() for r in results], indent=2)
    print(text)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    return EXIT_OK


def cmd_plot(args) -> int:
    records = read_trace(args.trace)
    change_points: Sequence[int] = ()
    if args.truth:
        change_points = read_ground_truth(args.truth).change_points
    events = read_events(args.events) if args.events else ()
    svg = render_trace_svg(records, change_points, events)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(svg + "\n")
    print(f"wrote {args.out} ({len(records)} points, {len(change_points)} truth markers)")
    return EXIT_OK


def _build_parser() -> _Parser:
    parser = _Parser(prog="bnshift", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic multi-domain statistic stream")
    p.add_argument("--domains", type=int, default=15)
    p.add_argument("--batches-per-domain", type=int, default=78)
    p.add_argument("--layers", default="3", help="layer count, or comma list of id[:channels]")
    p.add_argument("--channels", type=int, default=64, help="channels per layer")
    p.add_argument("--batch-size", type=int, default=128)
    p.add_argument("--gap", type=float, default=1.0, help="domain gap in within-domain sigmas")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output stream JSONL")
    p.add_argument("--truth", required=True, help="output ground-truth JSON")
    p.add_argument("--source", required=True, help="output source-stats JSONL")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("detect", help="run the detection engine over a stream file")
    p.add_argument("--input", required=True, help="stream JSONL")
    p.add_argument("--source", required=True, help="source-stats JSONL")
    _add_detector_flags(p)
    p.add_argument("--cooldown", type=int, default=0, help="min batches between events")
    p.add_argument("--trace", required=True, help="output trace (.csv or .jsonl)")
    p.add_argument("--events", required=True, help="output events JSONL")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("eval", help="score detection events against ground truth")
    p.add_argument("--events", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--tolerance", type=int, default=3)
    p.add_argument("--out", default=None, help="also write the report JSON here")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="evaluate several peak thresholds on one stream")
    p.add_argument("--input", required=True)
    p.add_argument("--source", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--thresholds", default="5,10,15,20")
    p.add_argument("--tolerance", type=int, default=3)
    _add_detector_flags(p, with_threshold=False)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("plot", help="render the momentum trace as a self-contained SVG")
    p.add_argument("--trace", required=True)
    p.add_argument("--truth", default=None)
    p.add_argument("--events", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plot)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except (ConfigError, ValidationError) as exc:
        print(f"bnshift: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (StreamFormatError, OSError) as exc:
        print(f"bnshift: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except BnshiftError as exc:
        print(f"bnshift: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

"""Canonical file formats for streams, traces, events, and ground truth.

Statistic streams are UTF-8 JSON lines. Line 1 is the header::

    {"format_version": 1, "layers": [{"id": "bn0", "channels": 64}, ...],
     "metadata": {...}}          # metadata optional

and each following line is one batch, in index order starting at 0::

    {"t": 0, "layers": [{"id": "bn0", "mean": [...], "var": [...]}, ...]}

Floats are written with Python's shortest round-trip representation, so
read(write(x)) reproduces x exactly. Readers are streaming: memory use is
bounded by one record plus the schema. Traces are JSON lines
({"t", "alpha_raw", "alpha_bar", "z", "is_peak"}) or, for plotting tools,
CSV with columns ``t,alpha_raw,alpha_bar,z,is_peak``; events are JSON
lines ({"t", "alpha_bar", "z_score"}); ground truth is a single JSON
object {"change_points": [...], "labels": [[start, label], ...]}.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import IO, Iterable, Iterator

from .engine import DetectionEvent, TraceRecord
from .errors import StreamFormatError, ValidationError
from .stats import BatchSnapshot, LayerSnapshot

FORMAT_VERSION = 1

PathLike = str | os.PathLike


@dataclass(frozen=True)
class StreamHeader:
    """Layer schema (ordered id/channel pairs) plus free-form metadata."""

    layers: tuple[tuple[str, int], ...]
    metadata: dict | None = None
    format_version: int = FORMAT_VERSION

    def __post_init__(self):
        if not self.layers:
            raise ValidationError("stream header must declare at least one layer")
        for layer_id, channels in self.layers:
            if not isinstance(layer_id, str) or not layer_id:
                raise ValidationError(f"bad layer id in header: {layer_id!r}")
            if not isinstance(channels, int) or channels < 1:
                raise ValidationError(f"layer {layer_id!r}: bad channel count {channels!r}")
        ids = [layer_id for layer_id, _ in self.layers]
        if len(set(ids)) != len(ids):
            raise ValidationError("duplicate layer id in header")

    @classmethod
    def for_snapshot(cls, snapshot: BatchSnapshot, metadata: dict | None = None) -> "StreamHeader":
        return cls(layers=tuple(snapshot.schema().items()), metadata=metadata)

    def schema(self) -> dict[str, int]:
        return dict(self.layers)


@dataclass(frozen=True)
class GroundTruth:
    """True change points: the first batch index of each new domain."""

    change_points: tuple[int, ...]
    labels: tuple[tuple[int, str], ...] | None = None

    def __post_init__(self):
        prev = 0
        for c in self.change_points:
            if not isinstance(c, int):
                raise ValidationError(f"change point {c!r} is not an integer")
            if c <= prev:
                raise ValidationError(
                    f"change points must be strictly increasing and > 0, got {c} after {prev}"
                )
            prev = c
        if self.labels is not None:
            prev_start = -1
            for start, label in self.labels:
                if not isinstance(start, int) or start < 0:
                    raise ValidationError(f"bad label start index {start!r}")
                if start <= prev_start:
                    raise ValidationError("label start indices must be strictly increasing")
                if not isinstance(label, str):
                    raise ValidationError(f"bad domain label {label!r}")
                prev_start = start


# ---------------------------------------------------------------------------
# Statistic streams


def _snapshot_to_json(snapshot: BatchSnapshot) -> str:
    payload = {
        "t": snapshot.batch_index,
        "layers": [
            {"id": layer.layer_id, "mean": layer.means.tolist(), "var": layer.variances.tolist()}
            for layer in snapshot.layers
        ],
    }
    return json.dumps(payload, ensure_ascii=False)


def write_stream(
    path: PathLike,
    snapshots: Iterable[BatchSnapshot],
    *,
    header: StreamHeader | None = None,
    metadata: dict | None = None,
) -> int:
    """Write header plus one line per snapshot; returns the snapshot count.

    The header is derived from the first snapshot when not given. Snapshots
    are consumed lazily and checked for contiguous batch indices.
    """
    it = iter(snapshots)
    first: BatchSnapshot | None = None
    if header is None:
        first = next(it, None)
        if first is None:
            raise ValidationError("cannot derive a stream header from an empty stream")
        header = StreamHeader.for_snapshot(first, metadata=metadata)
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        head: dict = {"format_version": header.format_version}
        head["layers"] = [{"id": i, "channels": c} for i, c in header.layers]
        if header.metadata is not None:
            head["metadata"] = header.metadata
        fh.write(json.dumps(head, ensure_ascii=False) + "\n")
        schema = header.schema()
        expected_t = 0
        if first is not None:
            _check_outgoing(first, schema, expected_t)
            fh.write(_snapshot_to_json(first) + "\n")
            expected_t += 1
            count += 1
        for snapshot in it:
            _check_outgoing(snapshot, schema, expected_t)
            fh.write(_snapshot_to_json(snapshot) + "\n")
            expected_t += 1
            count += 1
    return count


def _check_outgoing(snapshot: BatchSnapshot, schema: dict[str, int], expected_t: int) -> None:
    if snapshot.batch_index != expected_t:
        raise ValidationError(
            f"stream must be contiguous from 0: expected t={expected_t},"
            f" got {snapshot.batch_index}"
        )
    if snapshot.schema() != schema:
        raise ValidationError(
            f"snapshot t={snapshot.batch_index} does not match the header schema"
        )


def _parse_header(line: str, path: str) -> StreamHeader:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise StreamFormatError(f"malformed header JSON: {exc}", path=path, line=1) from exc
    if not isinstance(obj, dict):
        raise StreamFormatError("header must be a JSON object", path=path, line=1)
    version = obj.get("format_version")
    if version != FORMAT_VERSION:
        raise StreamFormatError(
            f"unsupported format_version {version!r} (expected {FORMAT_VERSION})",
            path=path,
            line=1,
        )
    layers = obj.get("layers")
    if not isinstance(layers, list) or not layers:
        raise StreamFormatError("header is missing a non-empty 'layers' list", path=path, line=1)
    pairs = []
    for entry in layers:
        if not isinstance(entry, dict) or "id" not in entry or "channels" not in entry:
            raise StreamFormatError(f"bad layer entry {entry!r}", path=path, line=1)
        pairs.append((entry["id"], entry["channels"]))
    metadata = obj.get("metadata")
    try:
        return StreamHeader(layers=tuple(pairs), metadata=metadata)
    except ValidationError as exc:
        raise StreamFormatError(str(exc), path=path, line=1) from exc


def _parse_snapshot(obj, schema: dict[str, int], path: str, lineno: int) -> BatchSnapshot:
    if not isinstance(obj, dict):
        raise StreamFormatError("record must be a JSON object", path=path, line=lineno)
    t = obj.get("t")
    if not isinstance(t, int) or t < 0:
        raise StreamFormatError(f"bad batch index {t!r}", path=path, line=lineno)
    raw_layers = obj.get("layers")
    if not isinstance(raw_layers, list):
        raise StreamFormatError("record is missing a 'layers' list", path=path, line=lineno)
    expected_ids = list(schema)
    if [entry.get("id") if isinstance(entry, dict) else None for entry in raw_layers] != expected_ids:
        found = [entry.get("id") if isinstance(entry, dict) else None for entry in raw_layers]
        raise StreamFormatError(
            f"layer ids {found} do not match header schema {expected_ids}",
            path=path,
            line=lineno,
        )
    layers = []
    for entry in raw_layers:
        layer_id = entry["id"]
        mean = entry.get("mean")
        var = entry.get("var")
        if not isinstance(mean, list) or not isinstance(var, list):
            raise StreamFormatError(
                f"layer {layer_id!r}: 'mean' and 'var' must be arrays", path=path, line=lineno
            )
        if len(mean) != schema[layer_id] or len(var) != schema[layer_id]:
            raise StreamFormatError(
                f"layer {layer_id!r}: expected {schema[layer_id]} channels,"
                f" found {len(mean)} means / {len(var)} variances",
                path=path,
                line=lineno,
            )
        try:
            layers.append(LayerSnapshot(layer_id, mean, var))
        except ValidationError as exc:
            raise StreamFormatError(str(exc), path=path, line=lineno) from exc
    try:
        return BatchSnapshot(t, layers)
    except ValidationError as exc:
        raise StreamFormatError(str(exc), path=path, line=lineno) from exc


def read_stream(path: PathLike) -> tuple[StreamHeader, Iterator[BatchSnapshot]]:
    """Open a stream file; returns its header and a lazy snapshot iterator."""
    spath = os.fspath(path)
    fh = open(spath, "r", encoding="utf-8")
    try:
        header_line = fh.readline()
        if not header_line.strip():
            raise StreamFormatError("empty stream file (missing header)", path=spath, line=1)
        header = _parse_header(header_line, spath)
    except Exception:
        fh.close()
        raise
    return header, _iter_snapshots(fh, header.schema(), spath)


def _iter_snapshots(fh: IO[str], schema: dict[str, int], path: str) -> Iterator[BatchSnapshot]:
    expected_t = 0
    with fh:
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise StreamFormatError(f"malformed JSON: {exc}", path=path, line=lineno) from exc
            snapshot = _parse_snapshot(obj, schema, path, lineno)
            if snapshot.batch_index != expected_t:
                raise StreamFormatError(
                    f"non-contiguous batch index: expected {expected_t},"
                    f" got {snapshot.batch_index}",
                    path=path,
                    line=lineno,
                )
            expected_t += 1
            yield snapshot


def read_stream_all(path: PathLike) -> tuple[StreamHeader, list[BatchSnapshot]]:
    header, snapshots = read_stream(path)
    return header, list(snapshots)


def read_source_stats(path: PathLike) -> BatchSnapshot:
    """Read a single-snapshot stream holding source model statistics."""
    spath = os.fspath(path)
    header, snapshots = read_stream(path)
    it = iter(snapshots)
    first = next(it, None)
    if first is None:
        raise StreamFormatError("source stats file contains no snapshot", path=spath)
    extra = next(it, None)
    if extra is not None:
        raise StreamFormatError(
            "source stats file must contain exactly one snapshot", path=spath
        )
    return first


def write_source_stats(path: PathLike, source_stats: BatchSnapshot, metadata: dict | None = None) -> None:
    write_stream(path, [source_stats], metadata=metadata)


# ---------------------------------------------------------------------------
# Traces


def write_trace_jsonl(path: PathLike, records: Iterable[TraceRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(
                json.dumps(
                    {
                        "t": r.t,
                        "alpha_raw": r.alpha_raw,
                        "alpha_bar": r.alpha_bar,
                        "z": r.z_score,
                        "is_peak": r.is_peak,
                    }
                )
                + "\n"
            )


def read_trace_jsonl(path: PathLike) -> list[TraceRecord]:
    spath = os.fspath(path)
    records = []
    with open(spath, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise StreamFormatError(f"malformed JSON: {exc}", path=spath, line=lineno) from exc
            try:
                records.append(
                    TraceRecord(
                        t=int(obj["t"]),
                        alpha_raw=float(obj["alpha_raw"]),
                        alpha_bar=float(obj["alpha_bar"]),
                        z_score=None if obj["z"] is None else float(obj["z"]),
                        is_peak=bool(obj["is_peak"]),
                    )
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise StreamFormatError(f"bad trace record: {exc!r}", path=spath, line=lineno) from exc
    return records


TRACE_CSV_COLUMNS = "t,alpha_raw,alpha_bar,z,is_peak"


def write_trace_csv(path: PathLike, records: Iterable[TraceRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(TRACE_CSV_COLUMNS + "\n")
        for r in records:
            z = "" if r.z_score is None else repr(r.z_score)
            fh.write(f"{r.t},{r.alpha_raw!r},{r.alpha_bar!r},{z},{int(r.is_peak)}\n")


def read_trace_csv(path: PathLike) -> list[TraceRecord]:
    spath = os.fspath(path)
    records = []
    with open(spath, "r", encoding="utf-8") as fh:
        head = fh.readline().strip()
        if head != TRACE_CSV_COLUMNS:
            raise StreamFormatError(
                f"bad trace CSV header {head!r} (expected {TRACE_CSV_COLUMNS!r})",
                path=spath,
                line=1,
            )
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 5:
                raise StreamFormatError(
                    f"expected 5 columns, found {len(parts)}", path=spath, line=lineno
                )
            try:
                records.append(
                    TraceRecord(
                        t=int(parts[0]),
                        alpha_raw=float(parts[1]),
                        alpha_bar=float(parts[2]),
                        z_score=None if parts[3] == "" else float(parts[3]),
                        is_peak=bool(int(parts[4])),
                    )
                )
            except ValueError as exc:
                raise StreamFormatError(f"bad trace row: {exc}", path=spath, line=lineno) from exc
    return records


def write_trace(path: PathLike, records: Iterable[TraceRecord]) -> None:
    """Write a trace; CSV when the path ends in .csv, else JSON lines."""
    if os.fspath(path).endswith(".csv"):
        write_trace_csv(path, records)
    else:
        write_trace_jsonl(path, records)


def read_trace(path: PathLike) -> list[TraceRecord]:
    if os.fspath(path).endswith(".csv"):
        return read_trace_csv(path)
    return read_trace_jsonl(path)


# ---------------------------------------------------------------------------
# Events


def write_events(path: PathLike, events: Iterable[DetectionEvent]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for e in events:
            fh.write(
                json.dumps({"t": e.t, "alpha_bar": e.alpha_bar, "z_score": e.z_score}) + "\n"
            )


def read_events(path: PathLike) -> list[DetectionEvent]:
    spath = os.fspath(path)
    events = []
    with open(spath, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                events.append(
                    DetectionEvent(
                        t=int(obj["t"]),
                        alpha_bar=float(obj["alpha_bar"]),
                        z_score=float(obj["z_score"]),
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise StreamFormatError(f"bad event record: {exc!r}", path=spath, line=lineno) from exc
    return events


# ---------------------------------------------------------------------------
# Ground truth


def write_ground_truth(path: PathLike, truth: GroundTruth) -> None:
    payload: dict = {"change_points": list(truth.change_points)}
    if truth.labels is not None:
        payload["labels"] = [[start, label] for start, label in truth.labels]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, ensure_ascii=False)
        fh.write("\n")


def read_ground_truth(path: PathLike) -> GroundTruth:
    spath = os.fspath(path)
    with open(spath, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise StreamFormatError(f"malformed JSON: {exc}", path=spath) from exc
    if not isinstance(obj, dict) or "change_points" not in obj:
        raise StreamFormatError("ground truth must be an object with 'change_points'", path=spath)
    raw_labels = obj.get("labels")
    labels = None
    if raw_labels is not None:
        try:
            labels = tuple((int(s), str(l)) for s, l in raw_labels)
        except (TypeError, ValueError) as exc:
            raise StreamFormatError(f"bad labels: {exc!r}", path=spath) from exc
    try:
        points = []
        for c in obj["change_points"]:
            if not isinstance(c, int):
                raise ValidationError(f"change point {c!r} is not an integer")
            points.append(c)
        return GroundTruth(change_points=tuple(points), labels=labels)
    except ValidationError as exc:
        raise StreamFormatError(str(exc), path=spath) from exc

"""Capture per-channel batch-norm input statistics from a live model.

Two exports share one JSONL wire format (the bnshift stream contract:
header line with format_version 1 and the layer schema, then one record
per batch):

* ``export_source_stats`` dumps the model's stored BN running
  mean/variance as a single pseudo-snapshot — the source statistics a
  detection engine is initialized with.
* ``capture_stream`` runs ordered test batches through a frozen copy of
  the model and records, per filtered BN layer, the mean and population
  variance of that layer's INPUT activations over the batch and spatial
  dimensions. The copy keeps capture side-effect free: neither weights
  nor BN buffers of the original model are touched, and adaptation
  happening elsewhere cannot leak into the captured statistics.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from typing import IO, Iterable, Sequence

import torch
from torch import nn

FORMAT_VERSION = 1


class CaptureError(RuntimeError):
    pass


@dataclass(frozen=True)
class CaptureConfig:
    """Flags shared by the capture CLI and the demo pipeline."""

    model: str = "tinycnn"
    layer_filter: str = "block3"
    batch_size: int = 64
    source_mode: bool = False


def matched_bn_layers(model: nn.Module, layer_filter: str) -> list[tuple[str, nn.Module]]:
    """Ordered (name, module) pairs of BN layers whose name matches the prefix."""
    matches = [
        (name, module)
        for name, module in model.named_modules()
        if isinstance(module, nn.modules.batchnorm._BatchNorm)
        and name.startswith(layer_filter)
    ]
    if not matches:
        bn_names = [
            name for name, module in model.named_modules()
            if isinstance(module, nn.modules.batchnorm._BatchNorm)
        ]
        raise CaptureError(
            f"layer filter {layer_filter!r} matched no batch-norm layers; available: {bn_names}"
        )
    return matches


def _write_header(fh: IO[str], layers: Sequence[tuple[str, int]], metadata: dict | None) -> None:
    head: dict = {
        "format_version": FORMAT_VERSION,
        "layers": [{"id": name, "channels": channels} for name, channels in layers],
    }
    if metadata is not None:
        head["metadata"] = metadata
    fh.write(json.dumps(head, ensure_ascii=False) + "\n")


def _write_record(fh: IO[str], t: int, stats: dict[str, tuple[list[float], list[float]]]) -> None:
    payload = {
        "t": t,
        "layers": [
            {"id": name, "mean": mean, "var": var} for name, (mean, var) in stats.items()
        ],
    }
    fh.write(json.dumps(payload, ensure_ascii=False) + "\n")


def export_source_stats(
    model: nn.Module, layer_filter: str, path, metadata: dict | None = None
) -> dict[str, int]:
    """Write the stored BN running statistics as a one-snapshot stream.

    Returns the exported layer schema (name -> channel count).
    """
    matches = matched_bn_layers(model, layer_filter)
    stats = {}
    for name, module in matches:
        if module.running_mean is None or module.running_var is None:
            raise CaptureError(f"layer {name!r} tracks no running statistics")
        stats[name] = (
            module.running_mean.detach().double().tolist(),
            module.running_var.detach().double().tolist(),
        )
    schema = [(name, len(mean)) for name, (mean, _) in stats.items()]
    with open(path, "w", encoding="utf-8") as fh:
        _write_header(fh, schema, metadata)
        _write_record(fh, 0, stats)
    return dict(schema)


def _channel_input_stats(x: torch.Tensor) -> tuple[list[float], list[float]]:
    if x.dim() < 2:
        raise CaptureError(f"expected batched input with a channel dim, got shape {tuple(x.shape)}")
    if x.shape[0] == 0:
        raise CaptureError("empty batch")
    # statistics over batch and spatial dims, per channel, as BN normalizes
    reduce_dims = [0] + list(range(2, x.dim()))
    x = x.detach().double()
    mean = x.mean(dim=reduce_dims)
    var = x.var(dim=reduce_dims, correction=0)
    return mean.tolist(), var.tolist()


def capture_stream(
    model: nn.Module,
    batches: Iterable[torch.Tensor],
    layer_filter: str,
    path,
    metadata: dict | None = None,
) -> int:
    """Run batches through a frozen copy of the model, recording BN input stats.

    Returns the number of captured batches. Batch order is the stream order.
    """
    oracle = copy.deepcopy(model).eval()
    for p in oracle.parameters():
        p.requires_grad_(False)
    matches = matched_bn_layers(oracle, layer_filter)

    current: dict[str, tuple[list[float], list[float]]] = {}

    def make_hook(name):
        def hook(module, inputs):
            current[name] = _channel_input_stats(inputs[0])
        return hook

    handles = [module.register_forward_pre_hook(make_hook(name)) for name, module in matches]
    count = 0
    try:
        with open(path, "w", encoding="utf-8") as fh:
            header_written = False
            with torch.no_grad():
                for t, batch in enumerate(batches):
                    current.clear()
                    oracle(batch)
                    missing = [name for name, _ in matches if name not in current]
                    if missing:
                        raise CaptureError(f"forward pass never reached layers {missing}")
                    if not header_written:
                        schema = [(name, len(current[name][0])) for name, _ in matches]
                        _write_header(fh, schema, metadata)
                        header_written = True
                    _write_record(fh, t, {name: current[name] for name, _ in matches})
                    count += 1
            if not header_written:
                raise CaptureError("no batches to capture")
    finally:
        for h in handles:
            h.remove()
    return count

"""Capture batch-norm input statistics from PyTorch models as JSONL streams."""

from .capture import CaptureConfig, CaptureError, capture_stream, export_source_stats, matched_bn_layers
from .models import TinyCNN, build_pretrained
from .toydata import augment, batched, corrupt, make_images

__all__ = [
    "CaptureConfig",
    "CaptureError",
    "TinyCNN",
    "augment",
    "batched",
    "build_pretrained",
    "capture_stream",
    "corrupt",
    "export_source_stats",
    "make_images",
    "matched_bn_layers",
]

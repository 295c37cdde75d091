"""Per-channel Gaussian statistics and the KL divergence they feed.

Every batch-norm channel is summarized as a univariate Gaussian
(mean, variance). A layer is an ordered vector of channels, a batch
snapshot an ordered list of layers. Variances are clamped to VAR_EPS at
construction so downstream KL evaluation never divides by zero; values
are validated eagerly so later stages can assume clean data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import SchemaError, ValidationError

# Floor applied to variances before any KL evaluation. Far below the
# sampling noise of any realistic batch statistic.
VAR_EPS = 1e-12


@dataclass(frozen=True)
class ChannelGaussian:
    """Mean and variance of one channel, treated as a univariate Gaussian."""

    mean: float
    variance: float

    def __post_init__(self):
        if not (math.isfinite(self.mean) and math.isfinite(self.variance)):
            raise ValidationError(
                f"non-finite channel statistic: mean={self.mean}, variance={self.variance}"
            )
        if self.variance < 0.0:
            raise ValidationError(f"negative variance: {self.variance}")


def kl_univariate_gaussian(running: ChannelGaussian, incoming: ChannelGaussian) -> float:
    """KL divergence D(running ‖ incoming) between two univariate Gaussians.

    Computed in variance form, log(v_inc / v_run) / 2 + (v_run + dmean^2)
    / (2 v_inc) - 1/2, with both variances clamped to VAR_EPS. The result
    is >= 0 up to float rounding and 0 iff the clamped inputs are equal.
    """
    v_run = max(running.variance, VAR_EPS)
    v_inc = max(incoming.variance, VAR_EPS)
    dmean = running.mean - incoming.mean
    return 0.5 * math.log(v_inc / v_run) + (v_run + dmean * dmean) / (2.0 * v_inc) - 0.5


def _as_stat_array(values, layer_id: str, kind: str) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)  # private copy; frozen below
    if arr.ndim != 1 or arr.size < 1:
        raise ValidationError(f"layer {layer_id!r}: {kind} must be a non-empty 1-d vector")
    bad = np.flatnonzero(~np.isfinite(arr))
    if bad.size:
        c = int(bad[0])
        raise ValidationError(
            f"layer {layer_id!r} channel {c}: non-finite {kind} {arr[c]!r}"
        )
    return arr


class LayerSnapshot:
    """Per-channel Gaussian statistics of one layer at one time step.

    Means and variances are held as parallel float64 vectors; the
    ``channels`` property exposes them as ChannelGaussian values. Negative
    variances are rejected, then everything is clamped to >= VAR_EPS.
    """

    __slots__ = ("layer_id", "means", "variances")

    def __init__(self, layer_id: str, means, variances):
        if not isinstance(layer_id, str) or not layer_id:
            raise ValidationError(f"layer id must be a non-empty string, got {layer_id!r}")
        means = _as_stat_array(means, layer_id, "mean")
        variances = _as_stat_array(variances, layer_id, "variance")
        if means.shape != variances.shape:
            raise ValidationError(
                f"layer {layer_id!r}: {means.size} means vs {variances.size} variances"
            )
        neg = np.flatnonzero(variances < 0.0)
        if neg.size:
            c = int(neg[0])
            raise ValidationError(
                f"layer {layer_id!r} channel {c}: negative variance {variances[c]!r}"
            )
        self.layer_id = layer_id
        self.means = means
        self.means.flags.writeable = False
        self.variances = np.maximum(variances, VAR_EPS)
        self.variances.flags.writeable = False

    @classmethod
    def from_channels(cls, layer_id: str, channels: Iterable[ChannelGaussian]) -> "LayerSnapshot":
        chans = list(channels)
        return cls(layer_id, [c.mean for c in chans], [c.variance for c in chans])

    @property
    def channel_count(self) -> int:
        return int(self.means.size)

    @property
    def channels(self) -> tuple[ChannelGaussian, ...]:
        return tuple(
            ChannelGaussian(float(m), float(v)) for m, v in zip(self.means, self.variances)
        )

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, LayerSnapshot)
            and self.layer_id == other.layer_id
            and np.array_equal(self.means, other.means)
            and np.array_equal(self.variances, other.variances)
        )

    def __repr__(self) -> str:
        return f"LayerSnapshot({self.layer_id!r}, channels={self.channel_count})"


class BatchSnapshot:
    """All tracked layers' channel statistics for one test batch."""

    __slots__ = ("batch_index", "layers")

    def __init__(self, batch_index: int, layers: Sequence[LayerSnapshot]):
        if not isinstance(batch_index, int) or batch_index < 0:
            raise ValidationError(f"batch_index must be a non-negative int, got {batch_index!r}")
        layers = tuple(layers)
        if not layers:
            raise ValidationError("snapshot must contain at least one layer")
        seen = set()
        for layer in layers:
            if layer.layer_id in seen:
                raise ValidationError(f"duplicate layer id {layer.layer_id!r}")
            seen.add(layer.layer_id)
        self.batch_index = batch_index
        self.layers = layers

    def schema(self) -> dict[str, int]:
        """Ordered layer_id -> channel_count map."""
        return {layer.layer_id: layer.channel_count for layer in self.layers}

    def layer(self, layer_id: str) -> LayerSnapshot:
        for layer in self.layers:
            if layer.layer_id == layer_id:
                return layer
        raise SchemaError(f"unknown layer {layer_id!r}")

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BatchSnapshot)
            and self.batch_index == other.batch_index
            and self.layers == other.layers
        )

    def __repr__(self) -> str:
        ids = [layer.layer_id for layer in self.layers]
        return f"BatchSnapshot(t={self.batch_index}, layers={ids})"


def validate_snapshot(
    snapshot: BatchSnapshot, expected_schema: Mapping[str, int] | None = None
) -> BatchSnapshot:
    """Check a snapshot against a layer schema and return it.

    Value-level validation (finiteness, variance clamping) already happened
    at construction; this enforces the cross-stream contract that layer ids,
    order, and channel counts never change.
    """
    if expected_schema is not None:
        expected = list(expected_schema.items())
        actual = list(snapshot.schema().items())
        for i, (exp, act) in enumerate(zip(expected, actual)):
            if exp[0] != act[0]:
                raise SchemaError(
                    f"layer {i}: expected {exp[0]!r}, found {act[0]!r} (t={snapshot.batch_index})"
                )
            if exp[1] != act[1]:
                raise SchemaError(
                    f"layer {exp[0]!r}: expected {exp[1]} channels, found {act[1]}"
                    f" (t={snapshot.batch_index})"
                )
        if len(actual) < len(expected):
            raise SchemaError(
                f"missing layer {expected[len(actual)][0]!r} (t={snapshot.batch_index})"
            )
        if len(actual) > len(expected):
            raise SchemaError(
                f"unexpected layer {actual[len(expected)][0]!r} (t={snapshot.batch_index})"
            )
    return snapshot

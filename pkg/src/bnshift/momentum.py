"""KL-driven adaptive momentum over streaming batch statistics.

The tracker keeps one running Gaussian per channel, initialized from the
source model's statistics. Each incoming batch yields a per-layer
momentum (channel-mean KL between running and incoming stats), aggregated
across layers and normalized by its running maximum into an adaptive
momentum in (0, 1]. That coefficient then exponentially blends the
incoming statistics into the running ones: near-zero while the stream
stays in one domain, spiking back toward 1 when the domain changes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

import numpy as np

from .errors import ConfigError, SchemaError, ValidationError
from .stats import BatchSnapshot, LayerSnapshot, validate_snapshot

# Stand-in for "just above zero": any first batch with a nonzero divergence
# immediately becomes the running maximum, so the first momentum is 1.
ALPHA_MAX_INIT = 1e-30

LayerFilter = str | Iterable[str] | None


@dataclass(frozen=True)
class MomentumStep:
    """Momentum values produced by one tracker step."""

    t: int
    alpha_raw: float
    alpha_bar: float
    per_layer: Mapping[str, float]


def aggregate_momentum(per_layer: Mapping[str, float]) -> float:
    """Arithmetic mean of per-layer momentum values."""
    if not per_layer:
        raise ValidationError("cannot aggregate momentum over an empty layer set")
    return float(sum(per_layer.values()) / len(per_layer))


def resolve_layer_filter(layer_ids: Iterable[str], layer_filter: LayerFilter) -> tuple[str, ...]:
    """Ordered subset of layer_ids selected by a prefix or explicit id set."""
    ids = list(layer_ids)
    if layer_filter is None:
        return tuple(ids)
    if isinstance(layer_filter, str):
        selected = tuple(i for i in ids if i.startswith(layer_filter))
        if not selected:
            raise ConfigError(f"layer filter prefix {layer_filter!r} matched no layers of {ids}")
        return selected
    wanted = set(layer_filter)
    unknown = wanted.difference(ids)
    if unknown:
        raise SchemaError(f"layer filter names unknown layers: {sorted(unknown)}")
    selected = tuple(i for i in ids if i in wanted)
    if not selected:
        raise ConfigError("layer filter matched no layers")
    return selected


def _layer_mean_kl(run_mean, run_var, inc_mean, inc_var) -> float:
    d = run_mean - inc_mean
    kl = 0.5 * np.log(inc_var / run_var) + (run_var + d * d) / (2.0 * inc_var) - 0.5
    return float(kl.mean())


class MomentumTracker:
    """Single-owner state machine: running stats, running max, batch counter.

    Running statistics are kept (and updated) for every layer present in
    the source stats; the layer filter only restricts which layers enter
    the momentum computation.
    """

    def __init__(
        self,
        source_stats: BatchSnapshot,
        layer_filter: LayerFilter = None,
        aggregate_fn: Callable[[Mapping[str, float]], float] = aggregate_momentum,
    ):
        validate_snapshot(source_stats)
        self._schema = source_stats.schema()
        self._tracked = resolve_layer_filter(self._schema, layer_filter)
        self._tracked_set = frozenset(self._tracked)
        self._aggregate = aggregate_fn
        self._running = {
            layer.layer_id: (layer.means.copy(), layer.variances.copy())
            for layer in source_stats.layers
        }
        self._alpha_max = ALPHA_MAX_INIT
        self._t = 0

    @property
    def t(self) -> int:
        return self._t

    @property
    def alpha_max(self) -> float:
        return self._alpha_max

    @property
    def tracked_layers(self) -> tuple[str, ...]:
        """Layer ids that contribute to the momentum value."""
        return self._tracked

    @property
    def schema(self) -> dict[str, int]:
        return dict(self._schema)

    def running_mean(self, layer_id: str) -> np.ndarray:
        return self._running[layer_id][0].copy()

    def running_variance(self, layer_id: str) -> np.ndarray:
        return self._running[layer_id][1].copy()

    def layer_momentum(self, layer: LayerSnapshot) -> float:
        """Channel-mean KL of one incoming layer against its running stats."""
        if layer.layer_id not in self._running:
            raise SchemaError(f"unknown layer {layer.layer_id!r}")
        run_mean, run_var = self._running[layer.layer_id]
        if layer.channel_count != run_mean.size:
            raise SchemaError(
                f"layer {layer.layer_id!r}: expected {run_mean.size} channels,"
                f" found {layer.channel_count}"
            )
        return _layer_mean_kl(run_mean, run_var, layer.means, layer.variances)

    def step(self, batch: BatchSnapshot) -> MomentumStep:
        """Advance one batch: momentum, max-normalization, then EMA update."""
        validate_snapshot(batch, self._schema)
        if batch.batch_index != self._t:
            raise ValidationError(
                f"batch index out of order: expected t={self._t}, got {batch.batch_index}"
            )
        per_layer = {
            layer.layer_id: self.layer_momentum(layer)
            for layer in batch.layers
            if layer.layer_id in self._tracked_set
        }
        alpha = self._aggregate(per_layer)
        if alpha > self._alpha_max:
            self._alpha_max = alpha
        alpha_bar = alpha / self._alpha_max
        for layer in batch.layers:
            run_mean, run_var = self._running[layer.layer_id]
            run_mean *= 1.0 - alpha_bar
            run_mean += alpha_bar * layer.means
            run_var *= 1.0 - alpha_bar
            run_var += alpha_bar * layer.variances
        t = self._t
        self._t += 1
        return MomentumStep(t=t, alpha_raw=alpha, alpha_bar=alpha_bar, per_layer=per_layer)

"""Synthetic multi-domain statistic streams and detection scoring.

The generator stands in for corruption-benchmark streams: per-channel
domain populations follow a random walk (each domain perturbs the
previous one by ``domain_gap`` within-domain standard deviations, with a
matching multiplicative variance perturbation), starting from the source
statistics — so the stream's first domain is already shifted away from
the source model, exactly as a deployed model meeting its first unseen
domain. Batches then carry the exact sampling distributions of Gaussian
sample moments: mean ~ N(mu, var/B) and variance with relative standard
deviation sqrt(2/(B-1)). Everything is determined by the seed.

The evaluator matches detections to true changes greedily in time order
within a tolerance window, merging clustered detections into one true
positive, and reports precision, recall, and mean detection delay.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .engine import DetectionEvent, Engine, EngineConfig
from .errors import ConfigError, ValidationError
from .io import GroundTruth
from .stats import VAR_EPS, BatchSnapshot, LayerSnapshot

# Variance walk scale: a domain change multiplies each channel variance by
# exp(domain_gap * SCALE_VARSHIFT * v), v standard normal.
SCALE_VARSHIFT = 0.5

# Spread of the synthetic source population: means ~ N(0, 1), variances
# log-normal with this sigma around 1.
_SOURCE_LOGVAR_SIGMA = 0.25


@dataclass(frozen=True)
class ScenarioConfig:
    num_domains: int = 15
    batches_per_domain: int = 78
    layers: tuple[tuple[str, int], ...] = (("bn0", 64), ("bn1", 64), ("bn2", 64))
    batch_size: int = 128
    domain_gap: float = 1.0
    rng_seed: int = 0

    def __post_init__(self):
        if not isinstance(self.num_domains, int) or self.num_domains < 1:
            raise ConfigError(f"num_domains must be a positive integer, got {self.num_domains!r}")
        if not isinstance(self.batches_per_domain, int) or self.batches_per_domain < 1:
            raise ConfigError(
                f"batches_per_domain must be a positive integer, got {self.batches_per_domain!r}"
            )
        if not self.layers:
            raise ConfigError("scenario needs at least one layer")
        for layer_id, channels in self.layers:
            if not isinstance(channels, int) or channels < 1:
                raise ConfigError(f"layer {layer_id!r}: bad channel count {channels!r}")
        if not isinstance(self.batch_size, int) or self.batch_size < 2:
            raise ConfigError(f"batch_size must be an integer >= 2, got {self.batch_size!r}")
        if not (math.isfinite(self.domain_gap) and self.domain_gap >= 0.0):
            raise ConfigError(f"domain_gap must be a non-negative real, got {self.domain_gap!r}")


def generate_scenario(
    cfg: ScenarioConfig,
) -> tuple[BatchSnapshot, list[BatchSnapshot], GroundTruth]:
    """Build (source stats, stream, ground truth) for one synthetic scenario."""
    rng = np.random.default_rng(cfg.rng_seed)
    g = cfg.domain_gap
    b = cfg.batch_size
    mean_noise = 1.0 / math.sqrt(b)
    var_rel_noise = math.sqrt(2.0 / (b - 1))

    # Source population per layer, then one random-walk step per domain.
    source_layers = []
    populations: list[list[tuple[np.ndarray, np.ndarray]]] = [[] for _ in range(cfg.num_domains)]
    for layer_id, channels in cfg.layers:
        mu = rng.normal(0.0, 1.0, channels)
        var = np.exp(rng.normal(0.0, _SOURCE_LOGVAR_SIGMA, channels))
        source_layers.append(LayerSnapshot(layer_id, mu, var))
        for d in range(cfg.num_domains):
            mu = mu + g * np.sqrt(var) * rng.standard_normal(channels)
            var = var * np.exp(g * SCALE_VARSHIFT * rng.standard_normal(channels))
            populations[d].append((mu, var))
    source_stats = BatchSnapshot(0, source_layers)

    stream = []
    for t in range(cfg.num_domains * cfg.batches_per_domain):
        d = t // cfg.batches_per_domain
        layers = []
        for (layer_id, channels), (mu, var) in zip(cfg.layers, populations[d]):
            sample_mean = rng.normal(mu, np.sqrt(var) * mean_noise)
            sample_var = var * (1.0 + rng.normal(0.0, var_rel_noise, channels))
            layers.append(LayerSnapshot(layer_id, sample_mean, np.maximum(sample_var, VAR_EPS)))
        stream.append(BatchSnapshot(t, layers))

    change_points = tuple(
        d * cfg.batches_per_domain for d in range(1, cfg.num_domains)
    )
    labels = tuple(
        (d * cfg.batches_per_domain, f"domain{d:02d}") for d in range(cfg.num_domains)
    )
    return source_stats, stream, GroundTruth(change_points=change_points, labels=labels)


# ---------------------------------------------------------------------------
# Scoring


@dataclass(frozen=True)
class EvalConfig:
    """Detections within `tolerance` batches after a true change count."""

    tolerance: int = 3

    def __post_init__(self):
        if not isinstance(self.tolerance, int) or self.tolerance < 0:
            raise ConfigError(f"tolerance must be a non-negative integer, got {self.tolerance!r}")


@dataclass(frozen=True)
class EvalReport:
    true_positives: int
    false_positives: int
    false_negatives: int
    precision: float
    recall: float
    mean_detection_delay: float | None

    def to_dict(self) -> dict:
        return {
            "true_positives": self.true_positives,
            "false_positives": self.false_positives,
            "false_negatives": self.false_negatives,
            "precision": self.precision,
            "recall": self.recall,
            "mean_detection_delay": self.mean_detection_delay,
        }


def evaluate(
    events: Sequence[DetectionEvent], truth: GroundTruth, cfg: EvalConfig = EvalConfig()
) -> EvalReport:
    """Greedy time-ordered matching of detections to true changes.

    Each change matches the earliest unmatched detection inside
    [c, c + tolerance]; later detections inside a matched window merge
    into that true positive. Detections outside every matched window are
    false positives; unmatched changes are false negatives.
    """
    times = [e.t for e in events]
    if any(t2 < t1 for t1, t2 in zip(times, times[1:])):
        raise ValidationError("events must be sorted by batch index")

    used = [False] * len(times)
    matched_windows: list[tuple[int, int]] = []
    delays: list[int] = []
    false_negatives = 0
    start = 0
    for c in truth.change_points:
        hit = None
        for i in range(start, len(times)):
            if used[i]:
                continue
            if times[i] < c:
                continue
            if times[i] > c + cfg.tolerance:
                break
            hit = i
            break
        if hit is None:
            false_negatives += 1
        else:
            used[hit] = True
            delays.append(times[hit] - c)
            matched_windows.append((c, c + cfg.tolerance))
            start = hit

    true_positives = len(delays)
    false_positives = 0
    for i, t in enumerate(times):
        if used[i]:
            continue
        if not any(lo <= t <= hi for lo, hi in matched_windows):
            false_positives += 1

    precision = (
        true_positives / (true_positives + false_positives)
        if true_positives + false_positives
        else 1.0
    )
    recall = (
        true_positives / (true_positives + false_negatives)
        if true_positives + false_negatives
        else 1.0
    )
    mean_delay = sum(delays) / len(delays) if delays else None
    return EvalReport(
        true_positives=true_positives,
        false_positives=false_positives,
        false_negatives=false_negatives,
        precision=precision,
        recall=recall,
        mean_detection_delay=mean_delay,
    )


@dataclass(frozen=True)
class SweepResult:
    threshold: float
    num_detections: int
    report: EvalReport

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "num_detections": self.num_detections,
            **self.report.to_dict(),
        }


def threshold_sweep(
    source_stats: BatchSnapshot,
    batches: Sequence[BatchSnapshot],
    truth: GroundTruth,
    thresholds: Sequence[float],
    engine_config: EngineConfig = EngineConfig(),
    eval_config: EvalConfig = EvalConfig(),
) -> list[SweepResult]:
    """One full detection + evaluation run per threshold, in input order."""
    for th in thresholds:
        if not (math.isfinite(th) and th > 0):
            raise ConfigError(f"thresholds must be positive reals, got {th!r}")
    results = []
    for th in thresholds:
        cfg = replace(engine_config, peak=replace(engine_config.peak, threshold=float(th)))
        engine = Engine(source_stats, cfg)
        _, events = engine.run_stream(batches)
        results.append(
            SweepResult(
                threshold=float(th),
                num_detections=len(events),
                report=evaluate(events, truth, eval_config),
            )
        )
    return results

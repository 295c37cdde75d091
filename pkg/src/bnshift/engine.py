"""Per-batch detection engine: momentum step, peak check, reset events.

Each batch advances the momentum tracker, feeds the normalized momentum
to the peak detector, and — when a peak fires and the cooldown permits —
emits a DetectionEvent through an optional reset hook. The hook is the
integration point for whatever should happen on a domain change (restore
model weights, log, count); the engine's own state is never reset by a
detection, which is exactly what keeps false positives low once the
running stats re-align with the new domain.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

from .errors import ConfigError, HookError
from .momentum import LayerFilter, MomentumTracker
from .peaks import PeakDetector, PeakDetectorConfig
from .stats import BatchSnapshot


@dataclass(frozen=True)
class EngineConfig:
    peak: PeakDetectorConfig = field(default_factory=PeakDetectorConfig)
    layer_filter: LayerFilter = None
    cooldown_batches: int = 0

    def __post_init__(self):
        if not isinstance(self.cooldown_batches, int) or self.cooldown_batches < 0:
            raise ConfigError(
                f"cooldown_batches must be a non-negative integer, got {self.cooldown_batches!r}"
            )


@dataclass(frozen=True)
class DetectionEvent:
    """A detected domain change: reset whatever model is being adapted."""

    t: int
    alpha_bar: float
    z_score: float


@dataclass(frozen=True)
class TraceRecord:
    """One processed batch: raw/normalized momentum and the peak decision."""

    t: int
    alpha_raw: float
    alpha_bar: float
    z_score: float | None
    is_peak: bool


ResetHook = Callable[[DetectionEvent], None]


class CollectingHook:
    """Reset hook that just records the events it receives."""

    def __init__(self):
        self.events: list[DetectionEvent] = []

    def __call__(self, event: DetectionEvent) -> None:
        self.events.append(event)


class Engine:
    """One engine per stream; owns a momentum tracker and a peak detector."""

    def __init__(self, source_stats: BatchSnapshot, config: EngineConfig | None = None):
        self.config = config if config is not None else EngineConfig()
        self._tracker = MomentumTracker(source_stats, layer_filter=self.config.layer_filter)
        self._detector = PeakDetector(self.config.peak)
        self._trace: list[TraceRecord] = []
        self._events: list[DetectionEvent] = []
        self._last_event_t: int | None = None

    @property
    def t(self) -> int:
        return self._tracker.t

    @property
    def tracker(self) -> MomentumTracker:
        return self._tracker

    @property
    def detector(self) -> PeakDetector:
        return self._detector

    @property
    def trace(self) -> tuple[TraceRecord, ...]:
        return tuple(self._trace)

    @property
    def events(self) -> tuple[DetectionEvent, ...]:
        return tuple(self._events)

    def _cooldown_allows(self, t: int) -> bool:
        if self._last_event_t is None:
            return True
        return t - self._last_event_t > self.config.cooldown_batches

    def process_batch(self, batch: BatchSnapshot, hook: Optional[ResetHook] = None) -> TraceRecord:
        """Advance momentum and peak state by one batch; maybe emit an event.

        All engine state is updated before the hook runs, so a hook
        failure (re-raised as HookError) leaves the trace, the event list,
        and subsequent processing intact.
        """
        step = self._tracker.step(batch)
        obs = self._detector.observe(step.alpha_bar, step.t)
        record = TraceRecord(
            t=step.t,
            alpha_raw=step.alpha_raw,
            alpha_bar=step.alpha_bar,
            z_score=obs.z_score,
            is_peak=obs.is_peak,
        )
        self._trace.append(record)
        event: DetectionEvent | None = None
        if obs.is_peak and self._cooldown_allows(step.t):
            event = DetectionEvent(t=step.t, alpha_bar=step.alpha_bar, z_score=obs.z_score)
            self._events.append(event)
            self._last_event_t = step.t
        if event is not None and hook is not None:
            try:
                hook(event)
            except Exception as exc:
                raise HookError(event, exc) from exc
        return record

    def run_stream(
        self, batches: Iterable[BatchSnapshot], hook: Optional[ResetHook] = None
    ) -> tuple[list[TraceRecord], list[DetectionEvent]]:
        """Process a whole stream; returns this call's records and events."""
        events_before = len(self._events)
        records = [self.process_batch(batch, hook) for batch in batches]
        return records, self._events[events_before:]

"""Online z-score peak detection over a scalar stream.

The first window_size values only fill the sliding window; once full, the
running mean and (population) standard deviation are initialized from it
and every later value is z-scored against them. A value more than
``threshold`` standard deviations ABOVE the running mean is a peak
(one-sided; downward spikes never fire). The window then slides and the
running statistics blend toward the current window's mean/std with weight
``influence`` — peaks included, peak or not.
"""

from __future__ import annotations

import math
import statistics
from collections import deque
from dataclasses import dataclass
from typing import Iterable

from .errors import ConfigError, ValidationError

# Guard for a zero-variance warm-up window: any upward deviation from a
# perfectly constant baseline is then anomalous.
SIGMA_EPS = 1e-12


@dataclass(frozen=True)
class PeakDetectorConfig:
    window_size: int = 10
    threshold: float = 15.0
    influence: float = 0.1

    def __post_init__(self):
        if not isinstance(self.window_size, int) or self.window_size < 2:
            raise ConfigError(f"window_size must be an integer >= 2, got {self.window_size!r}")
        if not (math.isfinite(self.threshold) and self.threshold > 0):
            raise ConfigError(f"threshold must be a positive real, got {self.threshold!r}")
        if not (0.0 <= self.influence <= 1.0):
            raise ConfigError(f"influence must lie in [0, 1], got {self.influence!r}")


@dataclass(frozen=True)
class PeakObservation:
    """Outcome of feeding one value to the detector.

    z_score is None while the detector is still warming up; is_peak
    implies a present z_score above the threshold.
    """

    t: int
    value: float
    z_score: float | None
    is_peak: bool


class PeakDetector:
    """Single-owner sliding-window z-score state."""

    def __init__(self, config: PeakDetectorConfig):
        self.config = config
        self._window: deque[float] = deque(maxlen=config.window_size)
        self._mu_r: float | None = None
        self._sigma_r: float | None = None

    @property
    def initialized(self) -> bool:
        """True once the window filled and running stats exist."""
        return self._mu_r is not None

    @property
    def window(self) -> tuple[float, ...]:
        return tuple(self._window)

    @property
    def running_mean(self) -> float | None:
        return self._mu_r

    @property
    def running_std(self) -> float | None:
        return self._sigma_r

    def observe(self, value: float, t: int) -> PeakObservation:
        if not math.isfinite(value):
            raise ValidationError(f"non-finite value {value!r} at t={t}")
        if not self.initialized:
            self._window.append(value)
            if len(self._window) == self.config.window_size:
                self._mu_r = statistics.fmean(self._window)
                self._sigma_r = statistics.pstdev(self._window)
            return PeakObservation(t=t, value=value, z_score=None, is_peak=False)

        z = (value - self._mu_r) / max(self._sigma_r, SIGMA_EPS)
        is_peak = z > self.config.threshold
        self._window.popleft()
        self._window.append(value)
        mu_c = statistics.fmean(self._window)
        sigma_c = statistics.pstdev(self._window)
        k = self.config.influence
        self._mu_r = (1.0 - k) * self._mu_r + k * mu_c
        self._sigma_r = (1.0 - k) * self._sigma_r + k * sigma_c
        return PeakObservation(t=t, value=value, z_score=z, is_peak=is_peak)


def detect_offline(values: Iterable[float], config: PeakDetectorConfig) -> list[PeakObservation]:
    """Fold observe over a finite stream; identical to streaming calls."""
    detector = PeakDetector(config)
    return [detector.observe(v, t) for t, v in enumerate(values)]

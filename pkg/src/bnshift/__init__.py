"""Streaming domain-shift detection from batch-norm statistics.

Per-channel batch statistics are treated as univariate Gaussians; a
KL-divergence-driven adaptive momentum tracks how far each incoming batch
sits from exponentially averaged running statistics, and an online
z-score peak detector turns spikes of that momentum into model-reset
events with no ground-truth domain knowledge.
"""

from .engine import (
    CollectingHook,
    DetectionEvent,
    Engine,
    EngineConfig,
    ResetHook,
    TraceRecord,
)
from .errors import (
    BnshiftError,
    ConfigError,
    HookError,
    SchemaError,
    StreamFormatError,
    ValidationError,
)
from .io import GroundTruth, StreamHeader
from .momentum import (
    ALPHA_MAX_INIT,
    MomentumStep,
    MomentumTracker,
    aggregate_momentum,
    resolve_layer_filter,
)
from .peaks import (
    SIGMA_EPS,
    PeakDetector,
    PeakDetectorConfig,
    PeakObservation,
    detect_offline,
)
from .simeval import (
    EvalConfig,
    EvalReport,
    ScenarioConfig,
    SweepResult,
    evaluate,
    generate_scenario,
    threshold_sweep,
)
from .stats import (
    VAR_EPS,
    BatchSnapshot,
    ChannelGaussian,
    LayerSnapshot,
    kl_univariate_gaussian,
    validate_snapshot,
)

__version__ = "0.1.0"

__all__ = [
    "ALPHA_MAX_INIT",
    "BatchSnapshot",
    "BnshiftError",
    "ChannelGaussian",
    "CollectingHook",
    "ConfigError",
    "DetectionEvent",
    "Engine",
    "EngineConfig",
    "EvalConfig",
    "EvalReport",
    "GroundTruth",
    "HookError",
    "LayerSnapshot",
    "MomentumStep",
    "MomentumTracker",
    "PeakDetector",
    "PeakDetectorConfig",
    "PeakObservation",
    "ResetHook",
    "ScenarioConfig",
    "SchemaError",
    "SIGMA_EPS",
    "StreamFormatError",
    "StreamHeader",
    "SweepResult",
    "TraceRecord",
    "ValidationError",
    "VAR_EPS",
    "aggregate_momentum",
    "detect_offline",
    "evaluate",
    "generate_scenario",
    "kl_univariate_gaussian",
    "resolve_layer_filter",
    "threshold_sweep",
    "validate_snapshot",
]

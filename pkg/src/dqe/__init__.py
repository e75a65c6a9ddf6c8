"""Detection Quality Evaluation (DQE) for time-series anomaly detection."""

__version__ = "0.1.0"

from .events import Interval, binarize, clip, extract_events
from .metric import aggregate, evaluate_event, evaluate_series, score_groups
from .partition import assign_detections, build_local_regions, estimate_period
from .series_io import LabeledSeries, normalize_scores, parse_series, read_report, read_series, write_report
from .thresholds import EvalConfig, sweep, threshold_grid

__all__ = [
    "EvalConfig",
    "Interval",
    "LabeledSeries",
    "aggregate",
    "assign_detections",
    "binarize",
    "build_local_regions",
    "clip",
    "estimate_period",
    "evaluate_event",
    "evaluate_series",
    "extract_events",
    "normalize_scores",
    "parse_series",
    "read_report",
    "read_series",
    "score_groups",
    "sweep",
    "threshold_grid",
    "write_report",
]

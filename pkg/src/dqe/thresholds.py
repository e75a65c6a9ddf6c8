"""Threshold-spectrum sweep: grid construction, binarisation, partitioning and
grouping of detections for every (anomaly event, threshold) cell."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .events import _binarize, extract_events
from .partition import DetectionGroups, LocalRegion, assign_detections, build_local_regions
from .series_io import LabeledSeries, NormalizedScores, normalize_scores

GridMode = Literal["uniform", "distinct_scores"]
Mode = Literal["score", "binary"]
Aggregation = Literal["sequence_level", "event_level"]


@dataclass(frozen=True)
class EvalConfig:
    l_nm: int
    m_thresholds: int = 100
    grid_mode: GridMode = "uniform"
    mode: Mode = "score"
    aggregation: Aggregation = "sequence_level"
    pa_k: float = 20.0

    def __post_init__(self) -> None:
        if not isinstance(self.l_nm, (int, np.integer)) or self.l_nm < 1:
            raise ValueError(f"l_nm must be a positive integer, got {self.l_nm!r}")
        if self.m_thresholds < 1:
            raise ValueError(f"m_thresholds must be >= 1, got {self.m_thresholds}")
        if self.grid_mode not in ("uniform", "distinct_scores"):
            raise ValueError(f"unknown grid_mode {self.grid_mode!r}")
        if self.mode not in ("score", "binary"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.aggregation not in ("sequence_level", "event_level"):
            raise ValueError(f"unknown aggregation {self.aggregation!r}")
        if not (0.0 <= self.pa_k <= 100.0):
            raise ValueError(f"pa_k must be in [0, 100], got {self.pa_k}")
        if self.mode == "binary":
            object.__setattr__(self, "m_thresholds", 1)


def threshold_grid(config: EvalConfig, scores: NormalizedScores) -> list[float]:
    M = config.m_thresholds
    if config.grid_mode == "uniform":
        return [i / M for i in range(1, M + 1)]
    distinct = np.unique(scores.values)
    if distinct.size == 1:
        # constant scorer: nothing should be detected
        return [1.0]
    cap = 10 * M
    if distinct.size > cap:
        idx = np.unique(np.round(np.linspace(0, distinct.size - 1, cap)).astype(np.int64))
        distinct = distinct[idx]
    return [float(v) for v in distinct]


def thread_count() -> int:
    raw = os.environ.get("DQE_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"DQE_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise ValueError("DQE_THREADS must be >= 0")
    return n if n > 0 else (os.cpu_count() or 1)


@dataclass(frozen=True)
class SweepResult:
    regions: tuple[LocalRegion, ...]
    thresholds: list[float]
    groups: list[list[DetectionGroups]]  # [event][threshold]


def groups_for(binary: np.ndarray, regions: tuple[LocalRegion, ...]) -> list[DetectionGroups]:
    detections = extract_events(binary)
    return [assign_detections(detections, region) for region in regions]


def binary_detections(series: LabeledSeries) -> np.ndarray:
    """Detection sequence used in binary mode: the explicit detection column,
    or the labels themselves when the file carries none."""
    return series.detections if series.detections is not None else series.labels


def sweep(series: LabeledSeries, config: EvalConfig) -> SweepResult:
    gt = extract_events(series.labels)
    regions = build_local_regions(gt, series.T, config.l_nm)

    if config.mode == "binary":
        column = groups_for(binary_detections(series), regions)
        return SweepResult(regions, [], [[g] for g in column])

    if series.scores is None:
        raise ValueError("score mode requires a score column (use binary mode otherwise)")
    norm = normalize_scores(series.scores)
    grid = threshold_grid(config, norm)
    values = norm.values

    def column_at(threshold: float) -> list[DetectionGroups]:
        return groups_for(_binarize(values, threshold), regions)

    workers = min(thread_count(), len(grid))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            columns = list(pool.map(column_at, grid))
    else:
        columns = [column_at(t) for t in grid]

    per_event = [[columns[j][i] for j in range(len(grid))] for i in range(len(regions))]
    return SweepResult(regions, grid, per_event)

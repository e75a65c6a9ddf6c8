"""Point-wise comparison metrics: F1, point adjustment at K%, AUC-ROC and
average precision."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .events import extract_events
from .series_io import LabeledSeries, NormalizedScores, normalize_scores
from .thresholds import EvalConfig, binary_detections, threshold_grid

ArrayLike = Sequence[float] | np.ndarray


@dataclass(frozen=True, slots=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def f1(self) -> float:
        denom = 2 * self.tp + self.fp + self.fn
        return 2 * self.tp / denom if denom else 0.0


def _pair(detections: ArrayLike, labels: ArrayLike) -> tuple[np.ndarray, np.ndarray]:
    d = np.asarray(detections).ravel() != 0
    y = np.asarray(labels).ravel() != 0
    if d.size != y.size:
        raise ValueError(f"length mismatch: {d.size} detections vs {y.size} labels")
    return d, y


def confusion(detections: ArrayLike, labels: ArrayLike) -> ConfusionCounts:
    d, y = _pair(detections, labels)
    tp = int(np.count_nonzero(d & y))
    fp = int(np.count_nonzero(d & ~y))
    fn = int(np.count_nonzero(~d & y))
    return ConfusionCounts(tp, fp, fn, d.size - tp - fp - fn)


def f1_point(detections: ArrayLike, labels: ArrayLike) -> float:
    return confusion(detections, labels).f1


def point_adjust_k(detections: ArrayLike, labels: ArrayLike, k_percent: float) -> np.ndarray:
    """Fill a ground-truth segment with ones once at least K% of it (and at
    least one point) is detected; everything else is left untouched."""
    if not (0.0 <= k_percent <= 100.0):
        raise ValueError(f"k_percent must be in [0, 100], got {k_percent}")
    d, y = _pair(detections, labels)
    out = d.astype(np.int8)
    for seg in extract_events(y):
        hits = int(np.count_nonzero(d[seg.start:seg.end]))
        if hits >= 1 and hits * 100 >= k_percent * seg.duration:
            out[seg.start:seg.end] = 1
    return out


def pa_k_f1(detections: ArrayLike, labels: ArrayLike, k_percent: float = 20.0) -> float:
    return f1_point(point_adjust_k(detections, labels, k_percent), labels)


def pa_k_mean(detections: ArrayLike, labels: ArrayLike) -> float:
    """Mean PA-K F1 over K = 10, 20, ..., 90."""
    return float(np.mean([pa_k_f1(detections, labels, k) for k in range(10, 100, 10)]))


def _scores_array(scores: NormalizedScores | ArrayLike) -> np.ndarray:
    values = scores.values if isinstance(scores, NormalizedScores) else scores
    s = np.asarray(values, dtype=np.float64).ravel()
    if not np.all(np.isfinite(s)):
        raise ValueError("scores contain NaN or infinity")
    return s


def _ranked_steps(scores: NormalizedScores | ArrayLike, labels: ArrayLike) -> tuple[np.ndarray, np.ndarray]:
    """Cumulative (tp, fp) after each distinct score, highest score first."""
    s = _scores_array(scores)
    y = np.asarray(labels).ravel() != 0
    if s.size != y.size:
        raise ValueError(f"length mismatch: {s.size} scores vs {y.size} labels")
    order = np.argsort(-s, kind="mergesort")
    s, y = s[order], y[order]
    last_of_group = np.r_[np.flatnonzero(np.diff(s) != 0), s.size - 1]
    tps = np.cumsum(y)[last_of_group]
    fps = (last_of_group + 1) - tps
    return tps, fps


def auc_roc(scores: NormalizedScores | ArrayLike, labels: ArrayLike) -> float:
    tps, fps = _ranked_steps(scores, labels)
    P, N = tps[-1], fps[-1]
    if P == 0 or N == 0:
        raise ValueError("AUC-ROC needs both positive and negative labels")
    tpr = np.r_[0, tps] / P
    fpr = np.r_[0, fps] / N
    return float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1])) / 2)


def auc_pr(scores: NormalizedScores | ArrayLike, labels: ArrayLike) -> float:
    """Average precision: sum over score steps of (R_n - R_{n-1}) * P_n."""
    tps, fps = _ranked_steps(scores, labels)
    P = tps[-1]
    if P == 0:
        raise ValueError("AUC-PR needs at least one positive label")
    recall = np.r_[0, tps] / P
    precision = tps / (tps + fps)
    return float(np.sum(np.diff(recall) * precision))


def best_f1(scores: NormalizedScores | ArrayLike, labels: ArrayLike, thresholds: Sequence[float]) -> tuple[float, float]:
    """Highest F1 over ``score >= t`` for t in ``thresholds``; returns
    (f1, threshold), preferring the lowest threshold on ties."""
    s = _scores_array(scores)
    y = np.asarray(labels).ravel() != 0
    grid = np.asarray(sorted(thresholds), dtype=np.float64)
    all_sorted = np.sort(s)
    pos_sorted = np.sort(s[y])
    predicted = s.size - np.searchsorted(all_sorted, grid, side="left")
    tp = pos_sorted.size - np.searchsorted(pos_sorted, grid, side="left")
    fp = predicted - tp
    fn = pos_sorted.size - tp
    denom = 2 * tp + fp + fn
    f1 = np.where(denom > 0, 2 * tp / np.maximum(denom, 1), 0.0)
    best = int(np.argmax(f1))
    return float(f1[best]), float(grid[best])


def best_pa_k(
    scores: NormalizedScores | ArrayLike, labels: ArrayLike, thresholds: Sequence[float], k_percent: float = 20.0
) -> tuple[float, float]:
    s = _scores_array(scores)
    results = [(pa_k_f1(s >= t, labels, k_percent), t) for t in sorted(thresholds)]
    best = max(range(len(results)), key=lambda i: (results[i][0], -i))
    return float(results[best][0]), float(results[best][1])


def baseline_scores(series: LabeledSeries, config: EvalConfig) -> dict[str, float | None]:
    """Baseline block of the evaluation report.

    Score mode reports F1 and PA-K F1 at their best threshold over the
    distinct-score grid; binary mode scores the detection sequence directly.
    AUC values are ``None`` when undefined (e.g. no normal points).
    """
    labels = series.labels
    if config.mode == "binary":
        det = binary_detections(series)
        out: dict[str, float | None] = {
            "original_f": f1_point(det, labels),
            "pa_k": pa_k_f1(det, labels, config.pa_k),
        }
        scores: np.ndarray = det.astype(np.float64)
    else:
        norm = normalize_scores(series.scores)
        grid = threshold_grid(replace(config, grid_mode="distinct_scores"), norm)
        f1, f1_t = best_f1(norm, labels, grid)
        pa, pa_t = best_pa_k(norm, labels, grid, config.pa_k)
        out = {"original_f": f1, "pa_k": pa}
        scores = norm.values
    out["auc_roc"] = _or_none(auc_roc, scores, labels)
    out["auc_pr"] = _or_none(auc_pr, scores, labels)
    if config.mode != "binary":
        out["original_f_threshold"] = f1_t
        out["pa_k_threshold"] = pa_t
    return out


def _or_none(fn, scores, labels) -> float | None:
    try:
        return fn(scores, labels)
    except ValueError:
        return None

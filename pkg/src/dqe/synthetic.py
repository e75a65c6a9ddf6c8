"""Synthetic detection scenarios and the controlled experiments built on them:
score_max / score_gap sweeps and lag / noise / anomaly-ratio robustness."""

from __future__ import annotations

import logging
import statistics
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from .baselines import auc_pr, auc_roc, baseline_scores, f1_point, pa_k_f1
from .events import Interval, extract_events
from .metric import evaluate_series
from .series_io import LabeledSeries, normalize_scores
from .thresholds import EvalConfig

log = logging.getLogger(__name__)

METRICS = ("dqe", "original_f", "pa_k", "auc_roc", "auc_pr")


class InfeasibleError(ValueError):
    """A scenario or perturbation that cannot be realised."""


# ---------------------------------------------------------------- patterns


@dataclass(frozen=True)
class MinimalAllEvents:
    """One detected point in the middle of every anomaly."""


@dataclass(frozen=True)
class MinimalOneEvent:
    """One detected point in the first anomaly only."""


@dataclass(frozen=True)
class FullOneEvent:
    """The first anomaly fully covered, nothing else."""


@dataclass(frozen=True)
class FullAllEvents:
    """Detections identical to the labels."""


@dataclass(frozen=True)
class NearMiss:
    """A detection of ``duration`` points ending ``offset`` points before each
    anomaly (or starting ``offset`` points after it)."""

    offset: int
    duration: int
    side: str = "before"


@dataclass(frozen=True)
class ScatteredFA:
    """``count`` false-alarm events with ``total_duration`` points overall,
    spread over the local regions (one per region, cycling). With
    ``capture`` every anomaly also gets a minimal detection."""

    count: int
    total_duration: int
    capture: bool = True


@dataclass(frozen=True)
class ContiguousFA:
    """A single false-alarm event of ``total_duration`` points at the start
    of the series."""

    total_duration: int
    capture: bool = True


@dataclass(frozen=True)
class RandomDetections:
    p: float
    seed: int = 0


Pattern = Union[
    MinimalAllEvents, MinimalOneEvent, FullOneEvent, FullAllEvents, NearMiss, ScatteredFA, ContiguousFA, RandomDetections
]


@dataclass(frozen=True)
class ScenarioSpec:
    T: int
    num_anomalies: int
    anomaly_len: int
    pattern: Pattern = field(default_factory=MinimalAllEvents)

    @classmethod
    def from_ratio(cls, num_anomalies: int, anomaly_len: int, anomaly_ratio: float, pattern: Pattern | None = None):
        """Scenario whose length is chosen to hit ``anomaly_ratio``."""
        if not (0.0 < anomaly_ratio < 1.0):
            raise InfeasibleError(f"anomaly_ratio must be in (0,1), got {anomaly_ratio}")
        T = int(round(num_anomalies * anomaly_len / anomaly_ratio))
        return cls(T, num_anomalies, anomaly_len, pattern or MinimalAllEvents())

    @property
    def anomaly_ratio(self) -> float:
        return self.num_anomalies * self.anomaly_len / self.T


def anomaly_layout(spec: ScenarioSpec) -> list[Interval]:
    """Evenly spaced, non-adjacent anomaly events."""
    N, L, T = spec.num_anomalies, spec.anomaly_len, spec.T
    if N < 1 or L < 1:
        raise InfeasibleError("num_anomalies and anomaly_len must be >= 1")
    free = T - N * L
    if free < N + 1:
        raise InfeasibleError(
            f"{N} anomalies of length {L} do not fit in T={T} with a normal point between and around them"
        )
    return [Interval(((i + 1) * free) // (N + 1) + i * L, ((i + 1) * free) // (N + 1) + (i + 1) * L) for i in range(N)]


def _mark(det: np.ndarray, start: int, end: int, what: str) -> None:
    if start < 0 or end > det.size or start >= end:
        raise InfeasibleError(f"{what} [{start}, {end}) does not fit in [0, {det.size})")
    det[start:end] = 1


def make_scenario(spec: ScenarioSpec) -> tuple[np.ndarray, np.ndarray]:
    anomalies = anomaly_layout(spec)
    T = spec.T
    labels = np.zeros(T, dtype=np.int8)
    for a in anomalies:
        labels[a.start:a.end] = 1
    det = np.zeros(T, dtype=np.int8)
    p = spec.pattern

    if isinstance(p, MinimalAllEvents):
        for a in anomalies:
            det[a.start + a.duration // 2] = 1
    elif isinstance(p, MinimalOneEvent):
        a = anomalies[0]
        det[a.start + a.duration // 2] = 1
    elif isinstance(p, FullOneEvent):
        det[anomalies[0].start:anomalies[0].end] = 1
    elif isinstance(p, FullAllEvents):
        det[:] = labels
    elif isinstance(p, NearMiss):
        if p.offset < 0 or p.duration < 1:
            raise InfeasibleError("near_miss needs offset >= 0 and duration >= 1")
        for i, a in enumerate(anomalies):
            if p.side == "before":
                start, end = a.start - p.offset - p.duration, a.start - p.offset
                floor = anomalies[i - 1].end if i else 0
                ok = start >= floor
            elif p.side == "after":
                start, end = a.end + p.offset, a.end + p.offset + p.duration
                ceil = anomalies[i + 1].start if i + 1 < len(anomalies) else T
                ok = end <= ceil
            else:
                raise ValueError(f"side must be 'before' or 'after', got {p.side!r}")
            if not ok:
                raise InfeasibleError(f"near-miss detection [{start}, {end}) collides with a neighbouring anomaly")
            _mark(det, start, end, "near-miss detection")
    elif isinstance(p, (ScatteredFA, ContiguousFA)):
        count = p.count if isinstance(p, ScatteredFA) else 1
        if count < 1 or p.total_duration < count:
            raise InfeasibleError("need count >= 1 and total_duration >= count")
        _place_false_alarms(det, anomalies, count, p.total_duration)
        if p.capture:
            for a in anomalies:
                det[a.start + a.duration // 2] = 1
    elif isinstance(p, RandomDetections):
        if not (0.0 < p.p < 1.0):
            raise InfeasibleError(f"p must be in (0,1), got {p.p}")
        rng = np.random.default_rng(p.seed)
        det = (rng.random(T) < p.p).astype(np.int8)
    else:
        raise TypeError(f"unknown detection pattern {p!r}")
    return labels, det


def _place_false_alarms(det: np.ndarray, anomalies: list[Interval], count: int, total: int) -> None:
    # each local region starts at the midpoint of the preceding gap (or 0)
    starts = [0] + [(prev.end + nxt.start) // 2 for prev, nxt in zip(anomalies, anomalies[1:])]
    base, extra = divmod(total, count)
    per_slot: dict[int, int] = {}
    for j in range(count):
        d = base + (1 if j < extra else 0)
        slot = j % len(anomalies)
        start = starts[slot] + per_slot.get(slot, 0)
        end = start + d
        if end >= anomalies[slot].start:
            raise InfeasibleError(f"false alarm [{start}, {end}) would touch anomaly {slot}")
        det[start:end] = 1
        per_slot[slot] = end - starts[slot] + 1


# ---------------------------------------------------------------- metrics on binary scenarios


def binary_metric(metric: str, labels: np.ndarray, detections: np.ndarray, l_nm: int, pa_k: float = 20.0) -> float:
    if metric == "dqe":
        series = LabeledSeries(labels, detections=detections, name="synthetic")
        return evaluate_series(series, EvalConfig(l_nm=l_nm, mode="binary"), with_baselines=False).dqe
    if metric == "original_f":
        return f1_point(detections, labels)
    if metric == "pa_k":
        return pa_k_f1(detections, labels, pa_k)
    if metric == "auc_roc":
        return auc_roc(detections.astype(np.float64), labels)
    if metric == "auc_pr":
        return auc_pr(detections.astype(np.float64), labels)
    raise ValueError(f"unknown metric {metric!r}; valid: {', '.join(METRICS)}")


AXES = ("num_anomalies", "anomaly_len", "anomaly_ratio")

# co-factors held fixed while one axis varies
_FIXED = {
    "num_anomalies": {"anomaly_len": 10, "anomaly_ratio": 0.01},
    "anomaly_len": {"num_anomalies": 10, "anomaly_ratio": 0.1},
    "anomaly_ratio": {"num_anomalies": 10, "anomaly_len": 10},
}


@dataclass(frozen=True)
class ScoreGapRow:
    axis: str
    value: float
    metric: str
    score_max: float
    score_gap: float


def default_l_nm(spec: ScenarioSpec) -> int:
    """A quarter of the normal gap between neighbouring anomalies."""
    gap = (spec.T - spec.num_anomalies * spec.anomaly_len) // (spec.num_anomalies + 1)
    return max(1, gap // 4)


def scenario_for(axis: str, value: float, pattern: Pattern) -> ScenarioSpec:
    if axis not in _FIXED:
        raise ValueError(f"unknown axis {axis!r}; valid: {', '.join(AXES)}")
    params = dict(_FIXED[axis])
    if axis == "anomaly_ratio":
        params[axis] = float(value)
    else:
        if int(value) != value or value < 1:
            raise InfeasibleError(f"{axis} must be a positive integer, got {value}")
        params[axis] = int(value)
    spec = ScenarioSpec.from_ratio(params["num_anomalies"], params["anomaly_len"], params["anomaly_ratio"], pattern)
    anomaly_layout(spec)
    return spec


def score_gap_experiment(
    axis: str, values: Sequence[float], metric: str, l_nm: int | None = None, pa_k: float = 20.0
) -> list[ScoreGapRow]:
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}; valid: {', '.join(METRICS)}")
    rows = []
    for value in values:
        spec_all = scenario_for(axis, value, MinimalAllEvents())
        spec_one = scenario_for(axis, value, MinimalOneEvent())
        width = l_nm if l_nm is not None else default_l_nm(spec_all)
        y, d_all = make_scenario(spec_all)
        _, d_one = make_scenario(spec_one)
        score_max = binary_metric(metric, y, d_all, width, pa_k)
        score_min = binary_metric(metric, y, d_one, width, pa_k)
        rows.append(ScoreGapRow(axis, value, metric, score_max, score_max - score_min))
    return rows


# ---------------------------------------------------------------- perturbations


@dataclass(frozen=True)
class Lag:
    steps: int


@dataclass(frozen=True)
class Noise:
    amplitude: float  # fraction of the score range
    seed: int = 0


@dataclass(frozen=True)
class Ratio:
    target: float
    context: int = 0  # points kept on each side of every anomaly


Perturbation = Union[Lag, Noise, Ratio]


def perturb(labels: np.ndarray, scores: np.ndarray, kind: Perturbation) -> tuple[np.ndarray, np.ndarray]:
    labels = np.asarray(labels, dtype=np.int8)
    scores = np.asarray(scores, dtype=np.float64)
    if isinstance(kind, Lag):
        return labels.copy(), np.roll(scores, kind.steps)
    if isinstance(kind, Noise):
        if kind.amplitude < 0:
            raise ValueError("noise amplitude must be >= 0")
        spread = float(scores.max() - scores.min())
        rng = np.random.default_rng(kind.seed)
        noise = rng.uniform(-kind.amplitude * spread, kind.amplitude * spread, scores.size)
        return labels.copy(), normalize_scores(scores + noise).values
    if isinstance(kind, Ratio):
        return _resample_ratio(labels, scores, kind)
    raise TypeError(f"unknown perturbation {kind!r}")


def _resample_ratio(labels: np.ndarray, scores: np.ndarray, kind: Ratio) -> tuple[np.ndarray, np.ndarray]:
    """Trim or pad normal points far from any anomaly so that the anomaly
    ratio becomes ``kind.target``. Anomalies and their context stay intact."""
    if not (0.0 < kind.target < 1.0):
        raise InfeasibleError(f"target ratio must be in (0,1), got {kind.target}")
    T = labels.size
    n_anom = int(labels.sum())
    if n_anom == 0:
        raise InfeasibleError("series has no anomalous points")
    protected = np.zeros(T, dtype=bool)
    for ev in extract_events(labels):
        protected[max(0, ev.start - kind.context): min(T, ev.end + kind.context)] = True
    distant = np.flatnonzero(~protected)
    new_T = int(round(n_anom / kind.target))
    if new_T == T:
        return labels.copy(), scores.copy()
    if new_T < T:
        drop = T - new_T
        if drop > distant.size:
            raise InfeasibleError(
                f"cannot reach ratio {kind.target}: would need to drop {drop} points, only {distant.size} are distant"
            )
        keep = np.ones(T, dtype=bool)
        keep[distant[(np.arange(drop) * distant.size) // drop]] = False
        return labels[keep].copy(), scores[keep].copy()
    add = new_T - T
    if distant.size == 0:
        raise InfeasibleError(f"cannot reach ratio {kind.target}: no distant normal points to replicate")
    # duplicate distant points, spread evenly over them
    picks = distant[(np.arange(add) * distant.size) // add]
    repeats = np.ones(T, dtype=np.int64)
    np.add.at(repeats, picks, 1)
    return np.repeat(labels, repeats), np.repeat(scores, repeats)


# ---------------------------------------------------------------- robustness


@dataclass(frozen=True)
class RobustnessConfig:
    lag_range: float = 0.25
    noise_amplitude: float = 0.05
    ratio_range: tuple[float, float] = (0.01, 0.2)
    samples_per_axis: int = 5
    seed: int = 0
    tau: int | None = None

    def __post_init__(self) -> None:
        if self.samples_per_axis < 2:
            raise ValueError("samples_per_axis must be >= 2")
        lo, hi = self.ratio_range
        if not (0.0 < lo <= hi < 1.0):
            raise ValueError(f"ratio_range must satisfy 0 < lo <= hi < 1, got {self.ratio_range}")


@dataclass(frozen=True)
class RobustnessResult:
    std: dict[str, dict[str, float]]  # axis -> metric -> population std-dev
    values: dict[str, dict[str, list[float]]]
    skipped: dict[str, int]

    def overall(self) -> dict[str, float]:
        """Per-metric mean of the per-axis standard deviations."""
        metrics = next(iter(self.std.values())).keys()
        return {m: statistics.fmean(self.std[a][m] for a in self.std) for m in metrics}


def perturbations(labels: np.ndarray, config: RobustnessConfig, l_nm: int) -> dict[str, list[Perturbation]]:
    tau = config.tau if config.tau is not None else 2 * l_nm
    k = config.samples_per_axis
    span = config.lag_range * tau
    lags = [Lag(int(round(v))) for v in np.linspace(-span, span, k)]
    noises = [Noise(config.noise_amplitude, config.seed + i) for i in range(k)]
    ratios = [Ratio(float(r), l_nm) for r in np.linspace(config.ratio_range[0], config.ratio_range[1], k)]
    return {"lag": lags, "noise": noises, "ratio": ratios}


def population_std(values: Iterable[float]) -> float:
    return statistics.pstdev(list(values))


def robustness_sweep(
    series: LabeledSeries, config: RobustnessConfig, metrics: Iterable[str], eval_config: EvalConfig
) -> RobustnessResult:
    metrics = list(metrics)
    bad = [m for m in metrics if m not in METRICS]
    if bad:
        raise ValueError(f"unknown metric(s) {bad}; valid: {', '.join(METRICS)}")
    if series.scores is None:
        raise ValueError("robustness sweep needs a score column")
    need_baselines = any(m != "dqe" for m in metrics)
    std: dict[str, dict[str, float]] = {}
    values: dict[str, dict[str, list[float]]] = {}
    skipped: dict[str, int] = {}
    for axis, kinds in perturbations(series.labels, config, eval_config.l_nm).items():
        collected: dict[str, list[float]] = {m: [] for m in metrics}
        skipped[axis] = 0
        for kind in kinds:
            try:
                y, s = perturb(series.labels, series.scores, kind)
            except InfeasibleError as exc:
                log.warning("skipping %s: %s", kind, exc)
                skipped[axis] += 1
                continue
            perturbed = LabeledSeries(y, s, series.name)
            report = evaluate_series(perturbed, eval_config, with_baselines=False)
            base = baseline_scores(perturbed, eval_config) if need_baselines else {}
            for m in metrics:
                v = report.dqe if m == "dqe" else base[m]
                if v is None:
                    raise ValueError(f"metric {m} undefined on a perturbed series ({kind})")
                collected[m].append(float(v))
        if len(next(iter(collected.values()), [])) < 2:
            raise InfeasibleError(f"fewer than two feasible perturbations on the {axis} axis")
        values[axis] = collected
        std[axis] = {m: population_std(v) for m, v in collected.items()}
    return RobustnessResult(std, values, skipped)

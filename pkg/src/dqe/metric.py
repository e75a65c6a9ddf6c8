"""Detection quality scoring: capture, near-miss and false-alarm components,
their context-aware adjustment, and aggregation over thresholds and events."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Sequence

from .baselines import baseline_scores
from .events import total_duration
from .partition import DetectionGroups, LocalRegion
from .series_io import EvaluationReport, EventEntry, LabeledSeries
from .thresholds import EvalConfig, sweep


@dataclass(frozen=True, slots=True)
class NearMissAttributes:
    eta: int      # closest response time
    xi: float     # mean distance of event centres to the anomaly
    zeta: int     # total near-miss duration
    k: int


@dataclass(frozen=True, slots=True)
class ComponentScores:
    s_cap: int
    s_nm: float
    s_fa: float
    alpha: float
    fa_burden: float
    sdqe: float
    near_miss: NearMissAttributes | None = None


@dataclass(frozen=True, slots=True)
class EventEvaluation:
    event_index: int
    dqe_local: float
    cap_mean: float
    nm_mean: float
    fa_mean: float


def capture_score(groups: DetectionGroups) -> int:
    return 1 if groups.d_cap else 0


def near_miss_attributes(groups: DetectionGroups, region: LocalRegion) -> NearMissAttributes | None:
    if not groups.d_nm:
        return None
    a_s, a_e = region.anomaly.start, region.anomaly.end
    etas = []
    dists = []
    for d in groups.d_nm:
        if d.end <= a_s:
            etas.append(a_s - d.end)
            dists.append(a_s - d.center)
        else:
            etas.append(d.start - a_e)
            dists.append(d.center - a_e)
    k = len(groups.d_nm)
    return NearMissAttributes(min(etas), math.fsum(dists) / k, total_duration(groups.d_nm), k)


def _decay(value: float, width: int) -> float:
    return max(0.0, 1.0 - value / width)


def near_miss_score(attrs: NearMissAttributes | None, groups: DetectionGroups, l_nm: int) -> float:
    if l_nm < 1:
        raise ValueError(f"l_nm must be >= 1, got {l_nm}")
    if attrs is None:
        raw = 1.0
    else:
        raw = _decay(attrs.eta, l_nm) * _decay(attrs.xi, l_nm) * _decay(attrs.zeta, l_nm)
    if not groups.d_nm:
        if not groups.d_cap:
            return 0.0
        if groups.d_fa:
            return 0.0
    return raw


def false_alarm_burden(groups: DetectionGroups, region: LocalRegion) -> float:
    l_fa = region.l_fa
    if not groups.d_fa or l_fa == 0:
        return 1.0
    return max(0.0, 1.0 - total_duration(groups.d_fa) / (l_fa / 2))


def false_alarm_randomness(groups: DetectionGroups, region: LocalRegion) -> float:
    """Penalty coefficient alpha = 1 - normalised entropy of the occupied
    unit bins of the false-alarm subregion.

    Occupied bins share the probability mass equally, so the entropy reduces
    to log2(m) for m occupied out of n bins.
    """
    n = region.l_fa
    m = total_duration(groups.d_fa)
    if m <= 1 or n <= 1:
        return 1.0
    return 1.0 - math.log2(m) / math.log2(n)


def false_alarm_score(burden: float, alpha: float, groups: DetectionGroups) -> float:
    if groups.empty:
        return 0.0
    return alpha * burden


def sdqe_local(s_cap: int, s_nm: float, s_fa: float) -> float:
    return math.sqrt((s_cap + s_nm) / 2 * s_fa)


def score_groups(groups: DetectionGroups, region: LocalRegion) -> ComponentScores:
    """All components for one region at one threshold."""
    s_cap = capture_score(groups)
    attrs = near_miss_attributes(groups, region)
    s_nm = near_miss_score(attrs, groups, region.l_nm)
    burden = false_alarm_burden(groups, region)
    alpha = false_alarm_randomness(groups, region)
    s_fa = false_alarm_score(burden, alpha, groups)
    return ComponentScores(s_cap, s_nm, s_fa, alpha, burden, sdqe_local(s_cap, s_nm, s_fa), attrs)


def evaluate_event(
    region: LocalRegion, per_threshold_groups: Sequence[DetectionGroups], event_index: int = 0
) -> EventEvaluation:
    M = len(per_threshold_groups)
    if M < 1:
        raise ValueError("at least one threshold is required")
    scores = [score_groups(g, region) for g in per_threshold_groups]
    return EventEvaluation(
        event_index,
        math.fsum(c.sdqe for c in scores) / M,
        math.fsum(c.s_cap for c in scores) / M,
        math.fsum(c.s_nm for c in scores) / M,
        math.fsum(c.s_fa for c in scores) / M,
    )


def evaluate_series(series: LabeledSeries, config: EvalConfig, *, with_baselines: bool = True) -> EvaluationReport:
    if not series.labels.any():
        raise ValueError("evaluation undefined: no anomaly events in labels")
    result = sweep(series, config)
    evaluations = [
        evaluate_event(region, column, i) for i, (region, column) in enumerate(zip(result.regions, result.groups))
    ]
    N = len(evaluations)
    events = [
        EventEntry(e.event_index, (r.anomaly.start, r.anomaly.end), e.dqe_local, e.cap_mean, e.nm_mean, e.fa_mean)
        for e, r in zip(evaluations, result.regions)
    ]
    return EvaluationReport(
        series=series.name,
        T=series.T,
        config={"l_nm": int(config.l_nm), "thresholds": int(config.m_thresholds), "mode": config.mode},
        dqe=math.fsum(e.dqe_local for e in evaluations) / N,
        components={
            "cap": math.fsum(e.cap_mean for e in evaluations) / N,
            "nm": math.fsum(e.nm_mean for e in evaluations) / N,
            "fa": math.fsum(e.fa_mean for e in evaluations) / N,
        },
        events=events,
        baselines=baseline_scores(series, config) if with_baselines else {},
    )


def aggregate(reports: Sequence[EvaluationReport], mode: Literal["sequence_level", "event_level"]) -> float:
    if not reports:
        raise ValueError("cannot aggregate an empty set of reports")
    if mode == "sequence_level":
        return math.fsum(r.dqe for r in reports) / len(reports)
    if mode == "event_level":
        pooled = [e.dqe_local for r in reports for e in r.events]
        if not pooled:
            raise ValueError("event-level aggregation needs per-event entries")
        return math.fsum(pooled) / len(pooled)
    raise ValueError(f"unknown aggregation mode {mode!r}")

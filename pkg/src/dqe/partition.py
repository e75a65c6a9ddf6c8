"""Local regions around anomaly events and the assignment of detections to
their capture / near-miss / false-alarm subregions."""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .events import EventList, Interval, clip


@dataclass(frozen=True, slots=True)
class LocalRegion:
    """Evaluation context of one anomaly.

    ``anomaly`` is the capture subregion itself; ``a_nm`` and ``a_fa`` hold at
    most two bands each (before / after the anomaly), already clipped to
    ``region``. ``l_nm`` is the configured near-miss width, which stays the
    normalisation constant even when a band is clipped shorter.
    """

    anomaly: Interval
    region: Interval
    a_nm: tuple[Interval, ...]
    a_fa: tuple[Interval, ...]
    l_nm: int

    @property
    def l_fa(self) -> int:
        return sum(band.duration for band in self.a_fa)

    def bands(self) -> tuple[tuple[str, Interval], ...]:
        out = [("cap", self.anomaly)]
        out += [("nm", b) for b in self.a_nm]
        out += [("fa", b) for b in self.a_fa]
        return tuple(sorted(out, key=lambda kb: kb[1].start))


@dataclass(frozen=True, slots=True)
class DetectionGroups:
    d_cap: EventList = ()
    d_nm: EventList = ()
    d_fa: EventList = ()

    @property
    def empty(self) -> bool:
        return not (self.d_cap or self.d_nm or self.d_fa)


@dataclass(frozen=True, slots=True)
class PeriodEstimate:
    tau: int
    method: Literal["provided", "autocorrelation"]


class NoPeriodError(ValueError):
    """Raised when no periodic structure can be found in a series."""


def build_local_regions(gt: Sequence[Interval], T: int, l_nm: int) -> tuple[LocalRegion, ...]:
    if not gt:
        raise ValueError("evaluation undefined: no anomaly events in labels")
    if l_nm < 1:
        raise ValueError(f"l_nm must be >= 1, got {l_nm}")
    for ev in gt:
        if ev.end > T:
            raise ValueError(f"anomaly event [{ev.start}, {ev.end}) outside [0, {T})")
    for prev, nxt in zip(gt, gt[1:]):
        if nxt.start < prev.end:
            raise ValueError("anomaly events must be sorted and disjoint")

    bounds = [0]
    bounds += [(prev.end + nxt.start) // 2 for prev, nxt in zip(gt, gt[1:])]
    bounds.append(T)

    regions = []
    for i, anomaly in enumerate(gt):
        lo, hi = bounds[i], bounds[i + 1]
        nm_lo = max(lo, anomaly.start - l_nm)
        nm_hi = min(hi, anomaly.end + l_nm)
        a_nm = _nonempty((nm_lo, anomaly.start), (anomaly.end, nm_hi))
        a_fa = _nonempty((lo, nm_lo), (nm_hi, hi))
        regions.append(LocalRegion(anomaly, Interval(lo, hi), a_nm, a_fa, l_nm))
    return tuple(regions)


def _nonempty(*spans: tuple[int, int]) -> tuple[Interval, ...]:
    return tuple(Interval(s, e) for s, e in spans if s < e)


def assign_detections(detections: Sequence[Interval], region: LocalRegion) -> DetectionGroups:
    """Split detections at subregion borders and group the fragments.

    ``detections`` must be sorted by start (as produced by ``extract_events``).
    Parts falling outside ``region`` are ignored here; they belong to the
    neighbouring regions.
    """
    window = region.region
    # first event that can still reach into the window
    i = bisect_left(detections, window.start, key=lambda ev: ev.end)
    groups: dict[str, list[Interval]] = {"cap": [], "nm": [], "fa": []}
    bands = region.bands()
    while i < len(detections) and detections[i].start < window.end:
        det = detections[i]
        for kind, band in bands:
            piece = clip(det, band)
            if piece is not None:
                groups[kind].append(piece)
        i += 1
    return DetectionGroups(tuple(groups["cap"]), tuple(groups["nm"]), tuple(groups["fa"]))


def estimate_period(values: Sequence[float] | np.ndarray, max_lag: int | None = None) -> PeriodEstimate:
    """Dominant period from the sample autocorrelation.

    The search covers lags from the first zero crossing of the
    autocorrelation up to ``max_lag``; lags before the crossing only measure
    short-range smoothness. Ties go to the smallest lag.
    """
    x = np.asarray(values, dtype=np.float64).ravel()
    T = x.size
    if T < 4:
        raise ValueError(f"series too short for period estimation (length {T} < 4)")
    if max_lag is None:
        max_lag = T // 2
    if not (2 <= max_lag <= T // 2):
        raise ValueError(f"max_lag must be in [2, {T // 2}], got {max_lag}")
    if not np.all(np.isfinite(x)):
        raise ValueError("series contains non-finite values")

    centered = x - x.mean()
    denom = float(np.dot(centered, centered))
    if denom <= 0.0 or denom < 1e-24 * T:
        raise NoPeriodError("no periodic structure: series has zero variance")

    n_fft = 1 << int(np.ceil(np.log2(2 * T)))
    spec = np.fft.rfft(centered, n_fft)
    acf = np.fft.irfft(spec * np.conj(spec), n_fft)[: max_lag + 1] / denom

    crossing = np.flatnonzero(acf[1:] <= 0.0)
    if crossing.size == 0:
        raise NoPeriodError("no periodic structure: autocorrelation never decays below zero")
    first = max(2, int(crossing[0]) + 1)
    if first > max_lag:
        raise NoPeriodError("no periodic structure within max_lag")

    window = acf[first: max_lag + 1]
    best = int(np.argmax(window))
    if window[best] <= 0.0:
        raise NoPeriodError("no periodic structure: no positive autocorrelation beyond the first crossing")
    return PeriodEstimate(tau=first + best, method="autocorrelation")

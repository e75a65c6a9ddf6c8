"""Binary sequences <-> event intervals, plus the small interval algebra used
by partitioning.

All intervals are half-open ``[start, end)`` over 0-based positions, so the
gap between ``[a, b)`` and ``[c, d)`` with ``b <= c`` is simply ``c - b``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


@dataclass(frozen=True, slots=True, order=True)
class Interval:
    start: int
    end: int

    def __post_init__(self) -> None:
        if not (0 <= self.start < self.end):
            raise ValueError(f"invalid interval [{self.start}, {self.end})")

    @property
    def duration(self) -> int:
        return self.end - self.start

    @property
    def center(self) -> float:
        return (self.start + self.end) / 2

    def overlaps(self, other: Interval) -> bool:
        return self.start < other.end and other.start < self.end

    def mirror(self, T: int) -> Interval:
        """Image under the time reversal t -> T - 1 - t."""
        return Interval(T - self.end, T - self.start)

    def as_list(self) -> list[int]:
        return [self.start, self.end]


EventList = tuple[Interval, ...]


def extract_events(binary: Sequence[int] | np.ndarray) -> EventList:
    """Maximal runs of ones, in order."""
    b = np.asarray(binary, dtype=np.int8).ravel()
    if b.size == 0:
        return ()
    padded = np.concatenate(([0], (b != 0).astype(np.int8), [0]))
    edges = np.flatnonzero(np.diff(padded))
    starts, ends = edges[0::2], edges[1::2]
    return tuple(Interval(int(s), int(e)) for s, e in zip(starts, ends))


def render(events: Iterable[Interval], T: int) -> np.ndarray:
    """Inverse of :func:`extract_events` for a sequence of length ``T``."""
    out = np.zeros(T, dtype=np.int8)
    for ev in events:
        out[ev.start:ev.end] = 1
    return out


def binarize(scores: Sequence[float] | np.ndarray, threshold: float) -> np.ndarray:
    """``y_t = 1`` iff ``score_t >= threshold``; threshold must lie in (0, 1]."""
    if not (0.0 < threshold <= 1.0):
        raise ValueError(f"threshold must be in (0, 1], got {threshold!r}")
    return _binarize(np.asarray(scores, dtype=np.float64), threshold)


def _binarize(values: np.ndarray, threshold: float) -> np.ndarray:
    return (values >= threshold).astype(np.int8)


def clip(event: Interval, window: Interval) -> Interval | None:
    start = max(event.start, window.start)
    end = min(event.end, window.end)
    if start >= end:
        return None
    return Interval(start, end)


def total_duration(events: Iterable[Interval]) -> int:
    return sum(ev.duration for ev in events)

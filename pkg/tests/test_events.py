import numpy as np
import pytest
from hypothesis import given, strategies as st

from dqe.events import Interval, binarize, clip, extract_events, render, total_duration


def test_extract_runs():
    assert extract_events([0, 1, 1, 0, 1]) == (Interval(1, 3), Interval(4, 5))
    assert extract_events([1, 1, 1]) == (Interval(0, 3),)
    assert extract_events([0, 0]) == ()
    assert extract_events([]) == ()


def test_interval_rejects_empty_and_negative():
    with pytest.raises(ValueError):
        Interval(3, 3)
    with pytest.raises(ValueError):
        Interval(-1, 2)


def test_interval_helpers():
    iv = Interval(2, 6)
    assert iv.duration == 4
    assert iv.center == 4.0
    assert iv.mirror(10) == Interval(4, 8)
    assert iv.overlaps(Interval(5, 9))
    assert not iv.overlaps(Interval(6, 9))


def test_clip():
    assert clip(Interval(0, 10), Interval(3, 5)) == Interval(3, 5)
    assert clip(Interval(0, 3), Interval(3, 5)) is None


def test_binarize_uses_ge_and_validates():
    assert binarize([0.2, 0.5, 0.7], 0.5).tolist() == [0, 1, 1]
    for bad in (0.0, 1.5, -0.1):
        with pytest.raises(ValueError):
            binarize([0.1], bad)


@given(st.lists(st.integers(0, 1), max_size=60))
def test_render_inverts_extract(bits):
    b = np.array(bits, dtype=np.int8)
    assert render(extract_events(b), b.size).tolist() == b.tolist()


@given(st.lists(st.integers(0, 1), min_size=1, max_size=60))
def test_events_are_maximal_and_cover_all_ones(bits):
    events = extract_events(bits)
    assert total_duration(events) == sum(bits)
    for a, b in zip(events, events[1:]):
        assert a.end < b.start


@given(st.lists(st.floats(0, 1), min_size=1, max_size=40), st.floats(0.01, 1), st.floats(0.01, 1))
def test_binarize_antitone(scores, t1, t2):
    lo, hi = sorted((t1, t2))
    assert np.all(binarize(scores, hi) <= binarize(scores, lo))

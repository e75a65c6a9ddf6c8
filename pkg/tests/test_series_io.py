import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dqe.series_io import (
    DataError,
    EvaluationReport,
    EventEntry,
    LabeledSeries,
    dumps_json,
    format_series,
    normalize_scores,
    parse_series,
    read_report,
    read_series,
    write_report,
)


def test_parse_label_and_score():
    s = parse_series("label,score\n0,0.1\n1,0.9")
    assert s.T == 2
    assert s.labels.tolist() == [0, 1]
    assert s.scores.tolist() == [0.1, 0.9]


def test_binary_only_file_has_no_scores():
    s = parse_series("label\n0\n1\n1")
    assert s.T == 3 and s.scores is None


def test_label_outside_range_names_line():
    with pytest.raises(DataError, match=r"label outside \{0,1\} at line 2"):
        parse_series("label,score\n2,0.5")


@pytest.mark.parametrize(
    "text, pattern",
    [
        ("label,score\n0,nan\n", "non-finite score at line 2"),
        ("label,score\n0,abc\n", "malformed score at line 2"),
        ("label,score\n0,0.1\n1\n", "malformed row at line 3"),
        ("label,score\n0,0.1\n1,\n", "length mismatch"),
        ("label,foo\n0,1\n", "unknown column"),
        ("score\n0.1\n", "missing required column 'label'"),
        ("", "header row required"),
        ("label,t\n0,0\n", "'t' column must come first"),
    ],
)
def test_parse_errors(text, pattern):
    with pytest.raises(DataError, match=pattern):
        parse_series(text)


def test_timestamp_column_crlf_bom_and_comments():
    raw = "﻿# written by a tool\r\nt,label,score\r\n0,0,1.5\r\n1,1,2.5\r\n".encode("utf-8")
    s = parse_series(raw)
    assert s.labels.tolist() == [0, 1]
    assert s.scores.tolist() == [1.5, 2.5]


def test_ndjson():
    s = parse_series('{"label": 0, "score": 0.25}\n{"label": 1, "score": 2}\n', "ndjson")
    assert s.labels.tolist() == [0, 1] and s.scores.tolist() == [0.25, 2.0]
    with pytest.raises(DataError, match="line 2"):
        parse_series('{"label": 0, "score": 1}\n{"label": 1}\n', "ndjson")
    with pytest.raises(DataError, match="line 1"):
        parse_series("[1, 2]\n", "ndjson")


def test_read_series_picks_format_from_suffix(tmp_path):
    p = tmp_path / "x.jsonl"
    p.write_text('{"label": 1}\n{"label": 0}\n')
    s = read_series(p)
    assert s.name == "x" and s.labels.tolist() == [1, 0]


def test_normalize_examples():
    assert normalize_scores([2, 4, 6]).values.tolist() == [0.0, 0.5, 1.0]
    assert normalize_scores([5, 5, 5]).values.tolist() == [0.0, 0.0, 0.0]
    assert normalize_scores([0.0, 1.0]).values.tolist() == [0.0, 1.0]
    with pytest.raises(ValueError):
        normalize_scores([])


finite = st.floats(-1e6, 1e6, allow_nan=False)


@given(st.lists(finite, min_size=2, max_size=50))
def test_normalize_idempotent_and_order_preserving(raw):
    n = normalize_scores(raw)
    assert np.all((n.values >= 0) & (n.values <= 1))
    if n.spread > 0:
        again = normalize_scores(n.values).values
        np.testing.assert_allclose(again, n.values, rtol=0, atol=1e-12)
    order = np.argsort(raw, kind="stable")
    assert np.all(np.diff(n.values[order]) >= 0)


@st.composite
def series(draw):
    T = draw(st.integers(1, 30))
    labels = draw(st.lists(st.integers(0, 1), min_size=T, max_size=T))
    scores = draw(st.one_of(st.none(), st.lists(finite, min_size=T, max_size=T)))
    dets = draw(st.one_of(st.none(), st.lists(st.integers(0, 1), min_size=T, max_size=T)))
    return LabeledSeries(
        np.array(labels, dtype=np.int8),
        None if scores is None else np.array(scores),
        "s",
        None if dets is None else np.array(dets, dtype=np.int8),
    )


@given(series(), st.sampled_from(["csv", "ndjson"]))
def test_parse_format_round_trip(s, fmt):
    assert parse_series(format_series(s, fmt), fmt, name="s") == s


def _report(value=0.1 + 0.2):
    return EvaluationReport(
        series="s",
        T=20,
        config={"l_nm": 4, "thresholds": 100, "mode": "score"},
        dqe=value,
        components={"cap": 1.0, "nm": 0.5, "fa": 1 / 3},
        events=[EventEntry(0, (8, 12), value, 1.0, 0.5, 1 / 3)],
        baselines={"original_f": 0.5, "pa_k": 0.5, "auc_roc": None, "auc_pr": 0.25},
    )


def test_report_round_trip_and_key_order(tmp_path):
    p = tmp_path / "r.json"
    write_report(_report(), p)
    data = json.loads(p.read_text())
    assert list(data) == ["series", "T", "config", "dqe", "components", "events", "baselines"]
    assert list(data["events"][0]) == ["index", "span", "dqe_local", "cap", "nm", "fa"]
    assert data["dqe"] == 0.1 + 0.2
    assert "0.30000000000000004" in p.read_text()
    assert read_report(p) == _report()


def test_report_rejects_nan(tmp_path):
    p = tmp_path / "r.json"
    with pytest.raises(ValueError):
        write_report(_report(math.nan), p)
    assert not p.exists()


def test_dumps_json_formats_floats_with_17_digits():
    assert dumps_json({"a": 1.0, "b": 1 / 3}, indent=0).replace("\n", "") == '{"a": 1.0,"b": 0.33333333333333331}'

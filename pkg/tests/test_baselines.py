import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracle
from dqe.baselines import (
    auc_pr,
    auc_roc,
    baseline_scores,
    best_f1,
    best_pa_k,
    confusion,
    f1_point,
    pa_k_f1,
    pa_k_mean,
    point_adjust_k,
)
from dqe.series_io import LabeledSeries
from dqe.thresholds import EvalConfig


def test_f1_examples():
    assert f1_point([1, 0, 1, 0], [1, 1, 0, 0]) == 0.5
    assert f1_point([1, 1, 0], [1, 1, 0]) == 1.0
    assert f1_point([0, 0, 0], [1, 1, 0]) == 0.0
    assert f1_point([0, 0], [0, 0]) == 0.0
    c = confusion([1, 0, 1, 0], [1, 1, 0, 0])
    assert (c.tp, c.fp, c.fn, c.tn) == (1, 1, 1, 1)
    with pytest.raises(ValueError):
        f1_point([1], [1, 0])


def test_point_adjust_threshold():
    labels = np.zeros(20, dtype=np.int8)
    labels[5:15] = 1
    det = np.zeros(20, dtype=np.int8)
    det[[6, 9, 12]] = 1
    assert point_adjust_k(det, labels, 20)[5:15].tolist() == [1] * 10
    assert point_adjust_k(det, labels, 50).tolist() == det.tolist()
    assert point_adjust_k(det, labels, 30)[5:15].sum() == 10
    with pytest.raises(ValueError):
        point_adjust_k(det, labels, 101)


def test_pa_k_mean_between_f1_and_pa():
    labels = [0, 1, 1, 1, 1, 0, 0, 1, 1, 0]
    det = [0, 1, 0, 0, 0, 1, 0, 1, 1, 0]
    assert f1_point(det, labels) <= pa_k_mean(det, labels) <= pa_k_f1(det, labels, 0.0)


def test_auc_examples():
    s, y = [0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]
    assert auc_roc(s, y) == 0.75
    assert math.isclose(auc_pr(s, y), 5 / 6, abs_tol=1e-12)
    assert auc_pr([0.9, 0.8, 0.7, 0.1], [0, 0, 0, 1]) == 0.25


def test_auc_undefined():
    with pytest.raises(ValueError):
        auc_roc([0.1, 0.2], [1, 1])
    with pytest.raises(ValueError):
        auc_pr([0.1, 0.2], [0, 0])
    with pytest.raises(ValueError):
        auc_roc([0.1, math.nan], [0, 1])


@st.composite
def scored(draw):
    T = draw(st.integers(2, 40))
    y = draw(st.lists(st.integers(0, 1), min_size=T, max_size=T).filter(lambda v: 0 < sum(v) < len(v)))
    s = draw(st.lists(st.integers(0, 6), min_size=T, max_size=T))  # coarse values force ties
    return [v / 6 for v in s], y


@given(scored())
def test_auc_against_oracles(case):
    s, y = case
    assert math.isclose(auc_roc(s, y), oracle.auc_rank_sum(s, y), abs_tol=1e-12)
    assert math.isclose(auc_pr(s, y), oracle.average_precision(s, y), abs_tol=1e-12)


@given(scored())
def test_best_f1_is_max_over_grid(case):
    s, y = case
    grid = sorted(set(s))
    f, t = best_f1(s, y, grid)
    brute = [oracle.f1([int(v >= g) for v in s], y) for g in grid]
    assert math.isclose(f, max(brute), abs_tol=1e-12)
    assert t == grid[brute.index(max(brute))]
    pk, _ = best_pa_k(s, y, grid, 20.0)
    assert pk >= f - 1e-12


def test_baseline_block_binary_and_score():
    y = np.array([0, 0, 1, 1, 0, 0], dtype=np.int8)
    det = np.array([0, 1, 1, 0, 0, 0], dtype=np.int8)
    out = baseline_scores(LabeledSeries(y, detections=det), EvalConfig(2, mode="binary"))
    assert list(out) == ["original_f", "pa_k", "auc_roc", "auc_pr"]
    assert out["original_f"] == 0.5 and out["pa_k"] == 0.8
    out = baseline_scores(LabeledSeries(y, np.array([0.1, 0.2, 0.9, 0.8, 0.3, 0.0])), EvalConfig(2))
    assert out["original_f"] == 1.0 and out["auc_roc"] == 1.0 and out["original_f_threshold"] > 0.3


def test_auc_roc_none_without_normal_points():
    y = np.ones(4, dtype=np.int8)
    out = baseline_scores(LabeledSeries(y, np.arange(4.0)), EvalConfig(1))
    assert out["auc_roc"] is None and out["auc_pr"] == 1.0

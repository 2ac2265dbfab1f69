import math
import warnings
from datetime import datetime, timezone

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from energycast.align import AlignedDataset
from energycast.errors import (
    EmptyInput,
    InsufficientHistory,
    TooFewRows,
    WindowTooLong,
    ZeroVariance,
    ZeroVarianceTarget,
)
from energycast.features import (
    SCORE_CAP,
    EmptyValidation,
    NormalizationParams,
    chronological_split,
    correlations,
    f_scores,
    feature_scores,
    fit_scaler,
    inverse_transform,
    lag_features,
    transform,
    windowize,
)
from energycast.ingest import parse_timestamp

T0 = 1_388_534_400


def dataset(energy, occ=None, temp=None, hum=None, cal=None, step=600, t0=T0):
    n = len(energy)
    fill = lambda v, c: np.full(n, c) if v is None else np.asarray(v, dtype=float)  # noqa: E731
    m = np.column_stack(
        [np.asarray(energy, float), fill(occ, 1.0), fill(temp, 20.0), fill(hum, 50.0), fill(cal, 1.0)]
    )
    return AlignedDataset.from_matrix(t0 + step * np.arange(n), m, grid_interval=step)


# scaler

def test_transform_hand_value():
    p = NormalizationParams((0, 0, 0, 0, 0), (26501.1, 1, 1, 1, 1))
    x = np.array([[746.6, 0, 0, 0, 0]])
    assert round(float(transform(x, p)[0, 0]), 6) == 0.028172


def test_fit_scaler_endpoints(rng):
    m = rng.normal(size=(50, 5))
    p = fit_scaler(m)
    t = transform(m, p)
    assert np.allclose(t.min(axis=0), 0) and np.allclose(t.max(axis=0), 1)
    assert np.all(t >= 0) and np.all(t <= 1)


def test_fit_scaler_single_row_and_constant():
    p = fit_scaler(np.array([[3.0, 4.0, 5.0, 6.0, 1.0]]))
    assert p.mins == p.maxs == (3.0, 4.0, 5.0, 6.0, 1.0)
    assert np.all(transform(np.array([[9.0, 9, 9, 9, 9]]), p) == 0)


def test_fit_scaler_empty():
    with pytest.raises(EmptyInput):
        fit_scaler(np.zeros((0, 5)))


def test_out_of_range_values_allowed(rng):
    p = fit_scaler(rng.uniform(0, 1, size=(20, 5)))
    t = transform(np.full((1, 5), 5.0), p)
    assert np.all(t > 1)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_round_trip(seed):
    r = np.random.default_rng(seed)
    m = r.normal(scale=r.uniform(0.1, 1e4), size=(30, 5))
    p = fit_scaler(m[:20])
    back = inverse_transform(transform(m, p), p)
    assert np.allclose(back, m, rtol=1e-12, atol=1e-12 * np.abs(m).max())


def test_scaler_on_dataset_uses_given_rows(small_academic):
    d = small_academic
    split = chronological_split(d)
    p = fit_scaler(d.rows(split.train))
    tr = transform(d.rows(split.train), p).matrix()
    assert tr.min() >= 0 and tr.max() <= 1
    assert p.maxs[0] == d.energy[split.train].max()


def test_params_dict_round_trip():
    p = NormalizationParams((0.0, 1.0, 2.0, 3.0, 0.0), (1.0, 2.0, 3.0, 4.0, 1.0))
    assert NormalizationParams.from_dict(p.to_dict()) == p


# split

def test_split_large_count():
    assert chronological_split(151516).sizes == (106061, 22727, 22728)


def test_split_exact_ratio():
    s = chronological_split(100)
    assert s.sizes == (70, 15, 15)
    assert s.train == range(0, 70) and s.val == range(70, 85) and s.test == range(85, 100)


def test_split_three_rows_warns():
    with pytest.warns(EmptyValidation):
        s = chronological_split(3)
    assert s.sizes == (2, 0, 1)


def test_split_too_few():
    with pytest.raises(TooFewRows):
        chronological_split(2)


@given(st.integers(3, 10**6))
def test_split_properties(n):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", EmptyValidation)
        s = chronological_split(n)
    assert sum(s.sizes) == n
    assert s.train.stop == s.val.start and s.val.stop == s.test.start
    assert s.sizes[0] == math.floor(0.7 * n + 1e-9)
    if len(s.val):
        assert s.train.stop - 1 < s.val.start < s.test.start


# lags

def _day_of(ts):
    return datetime.fromtimestamp(int(ts), tz=timezone.utc).strftime("%Y-%m-%d %H:%M")


def test_lags_sunday_example():
    start = parse_timestamp("2015-06-01T00:00:00Z")
    n = 36 * 144
    ts = start + 600 * np.arange(n)
    weekday = np.array([datetime.fromtimestamp(int(t), tz=timezone.utc).weekday() for t in ts[::144]])
    cal = np.repeat((weekday < 5).astype(float), 144)
    d = dataset(np.arange(n, dtype=float), cal=cal, t0=start)
    table = lag_features(d, 3)
    row = int(np.flatnonzero(d.timestamps == parse_timestamp("2015-07-05T16:00:00Z"))[0])
    i = int(np.flatnonzero(table.rows == row)[0])
    lag_days = [_day_of(d.timestamps[r]) for r in table.lag_rows[i]]
    assert lag_days == ["2015-07-04 16:00", "2015-06-28 16:00", "2015-06-27 16:00"]
    assert table.X[i, 4:].tolist() == [float(r) for r in table.lag_rows[i]]


def test_lags_alternating_calendar():
    # 10 days, 4 rows per day, working days alternate
    per_day, days = 4, 10
    cal = np.repeat([1.0, 0.0] * (days // 2), per_day)
    d = dataset(np.arange(days * per_day, dtype=float), cal=cal, step=86400 // per_day)
    table = lag_features(d, 3)
    expected = {}
    for day in range(6, days):
        for c in range(per_day):
            expected[day * per_day + c] = [(day - 2 * j) * per_day + c for j in (1, 2, 3)]
    assert table.rows.tolist() == sorted(expected)
    assert table.lag_rows.tolist() == [expected[r] for r in table.rows.tolist()]


def test_lags_first_days_dropped(small_academic):
    table = lag_features(small_academic, 3)
    assert table.rows.min() >= 3 * 144
    assert table.columns == ["occupancy", "temperature", "humidity", "calendar", "lag_1", "lag_2", "lag_3"]


def test_lag_sources_match(small_academic):
    d = small_academic
    table = lag_features(d, 3)
    clock, day, cal = d.local_seconds(), d.local_day(), d.calendar
    for j in range(3):
        src = table.lag_rows[:, j]
        assert np.all(clock[src] == clock[table.rows])
        assert np.all(cal[src] == cal[table.rows])
        assert np.all(day[src] < day[table.rows])
    assert np.all(table.X[:, 4:] == d.energy[table.lag_rows])


def test_lags_insufficient_history():
    with pytest.raises(InsufficientHistory):
        lag_features(dataset(np.arange(144.0)), 3)


# windows

def test_windowize_counts_and_shift():
    d = dataset(np.arange(10.0))
    seq = windowize(d, 6)
    assert len(seq) == 4
    assert seq.y.tolist() == [6.0, 7.0, 8.0, 9.0]
    assert seq.X.shape == (4, 6, 5)
    assert seq.X[0, :, 0].tolist() == [0, 1, 2, 3, 4, 5]


def test_windowize_minimal_window():
    seq = windowize(dataset(np.arange(5.0)), 1)
    assert seq.X.shape == (4, 1, 5)
    assert np.array_equal(seq.X[:, 0, 0], seq.y - 1)


def test_windowize_too_long():
    with pytest.raises(WindowTooLong):
        windowize(dataset(np.arange(6.0)), 6)


def test_in_rows_with_context():
    seq = windowize(dataset(np.arange(20.0)), 3)
    sub = seq.in_rows(range(5, 10), context_from=5)
    assert sub.target_rows.tolist() == [8, 9]


# scoring

def test_identical_feature_is_capped():
    y = np.arange(10.0)
    scores = f_scores({"same": y.copy(), "noise": np.sin(y)}, y)
    assert scores[0] == ("same", SCORE_CAP)


def test_independent_feature_scores_low(rng):
    y = rng.normal(size=20000)
    (_, s), = f_scores({"x": rng.normal(size=20000)}, y)
    assert s < 15  # F(1, n-2) upper 0.1% quantile is about 10.8


def test_scores_scale_invariant(rng):
    y = rng.normal(size=100)
    cols = {"a": y + rng.normal(size=100), "b": y + 3 * rng.normal(size=100)}
    base = f_scores(cols, y)
    scaled = f_scores({"a": 100 * cols["a"] + 7, "b": cols["b"]}, y)
    assert [k for k, _ in base] == [k for k, _ in scaled]
    assert np.isclose(dict(base)["a"], dict(scaled)["a"], rtol=1e-9)


def test_constant_target_rejected():
    with pytest.raises(ZeroVarianceTarget):
        feature_scores(dataset(np.ones(10), occ=np.arange(10)))


def test_correlations_sign_and_zero_variance():
    e = np.arange(10.0)
    d = dataset(e, occ=-e, temp=np.arange(10.0) ** 2, hum=np.cos(e), cal=np.arange(10) % 2)
    assert correlations(d)["occupancy"] == pytest.approx(-1.0, abs=1e-12)
    with pytest.raises(ZeroVariance) as exc:
        correlations(dataset(e, occ=-e))
    assert exc.value.feature == "temperature"


def test_academic_occupancy_dominates(small_academic):
    corr = correlations(small_academic)
    assert max(corr, key=lambda f: abs(corr[f])) == "occupancy"
    assert feature_scores(small_academic)[0][0] == "occupancy"

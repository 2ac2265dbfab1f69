import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from energycast.align import AlignedDataset, Agg, downsample, fuse, time_interpolate, upsample
from energycast.errors import EmptyIntersection, IncompatibleInterval, InsufficientKnownPoints, MissingChannel
from energycast.ingest import (
    Channel,
    RawSeries,
    format_timestamp as iso,
    parse_series,
    parse_timestamp,
    validate_series,
)

T0 = 1_388_534_400  # 2014-01-01T00:00:00Z
IST = 19800


def series(channel, ts, vals):
    return validate_series(RawSeries(channel, ts, vals))


def test_downsample_sum_and_mean():
    s = series("energy", T0 + 60 * np.arange(10), np.ones(10))
    assert downsample(s, 600, Agg.SUM).values.tolist() == [10.0]
    assert downsample(s, 600, Agg.MEAN).values.tolist() == [1.0]
    assert downsample(s, 600, "last").values.tolist() == [1.0]


def test_downsample_empty_window_is_missing():
    vals = np.r_[np.ones(10), np.full(10, np.nan), np.ones(10)]
    out = downsample(series("energy", T0 + 60 * np.arange(30), vals), 600)
    assert out.values[0] == 10 and math.isnan(out.values[1]) and out.values[2] == 10
    assert out.timestamps.tolist() == [T0, T0 + 600, T0 + 1200]


def test_downsample_incompatible():
    s = series("energy", T0 + 420 * np.arange(5), np.ones(5))
    with pytest.raises(IncompatibleInterval):
        downsample(s, 600)


def test_downsample_last_takes_latest_present():
    s = series("occupancy", T0 + 60 * np.arange(10), [1, 2, 3, 4, 5, 6, 7, 8, 9, np.nan])
    assert downsample(s, 600, Agg.LAST).values.tolist() == [9.0]


def test_sum_conserves_total(rng):
    vals = rng.uniform(0, 5, 600)
    vals[rng.random(600) < 0.3] = np.nan
    vals[::10] = 1.0  # every window keeps a present point
    s = series("energy", T0 + 60 * np.arange(600), vals)
    out = downsample(s, 600, Agg.SUM)
    assert np.isclose(out.values.sum(), np.nansum(vals), rtol=1e-12)


def test_upsample_structure():
    s = series("temperature", T0 + 1800 * np.arange(4), [10.0, 20.0, 30.0, 40.0])
    up = upsample(s, 600)
    assert len(up) == 10
    assert up.values[::3].tolist() == [10.0, 20.0, 30.0, 40.0]
    assert np.isnan(up.values[1::3]).all() and np.isnan(up.values[2::3]).all()
    assert up.interval_native == 600


def test_upsample_identity_and_single_point():
    s = series("temperature", T0 + 600 * np.arange(3), [1.0, 2.0, 3.0])
    assert upsample(s, 600) == s
    one = series("temperature", [T0], [7.0])
    assert upsample(one, 600).values.tolist() == [7.0]


def test_upsample_incompatible():
    s = series("temperature", T0 + 1800 * np.arange(3), [1.0, 2.0, 3.0])
    with pytest.raises(IncompatibleInterval):
        upsample(s, 700)


def test_interpolate_hand_value():
    s = series("temperature", [0, 600, 1200, 1800], [10.0, np.nan, np.nan, 40.0])
    out = time_interpolate(s)
    assert out.values.tolist() == [10.0, 20.0, 30.0, 40.0]


def test_interpolate_boundaries_hold_end_values():
    s = series("temperature", [0, 600, 1200, 1800, 2400], [np.nan, 10.0, 12.0, 20.0, np.nan])
    out = time_interpolate(s)
    assert out.values.tolist() == [10.0, 10.0, 12.0, 20.0, 20.0]


def test_interpolate_needs_two_points():
    with pytest.raises(InsufficientKnownPoints):
        time_interpolate(series("temperature", [0, 600], [np.nan, 1.0]))


@settings(max_examples=50, deadline=None)
@given(
    st.floats(-50, 50), st.floats(-1e-3, 1e-3), st.lists(st.booleans(), min_size=5, max_size=60)
)
def test_interpolate_affine_exact_and_idempotent(a, b, mask):
    mask = np.array(mask)
    mask[0] = mask[-1] = True
    t = 600 * np.arange(len(mask))
    truth = a + b * t
    vals = np.where(mask, truth, np.nan)
    once = time_interpolate(series("temperature", t, vals))
    assert np.allclose(once.values, truth, rtol=0, atol=1e-12 * (1 + abs(a) + abs(b) * t[-1]))
    assert time_interpolate(once) == once
    assert np.array_equal(once.values[mask], vals[mask])


def _channels(spans):
    """Five channels at grid rate with the given (start, end) per channel."""
    out = {}
    for ch in Channel:
        if ch is Channel.CALENDAR:
            continue
        a, b = spans.get(ch, spans["default"])
        ts = np.arange(a, b + 600, 600)
        out[ch] = RawSeries(ch, ts, np.ones(len(ts)))
    out[Channel.CALENDAR] = RawSeries("calendar", [T0], [1.0])
    return out


def test_fuse_intersection():
    h = 3600
    ch = _channels({"default": (T0 + 10 * h, T0 + 12 * h), Channel.OCCUPANCY: (T0 + 10 * h + 1800, T0 + 12 * h + 1800)})
    d = fuse(ch)
    assert d.timestamps[0] == T0 + 10 * h + 1800
    assert d.timestamps[-1] == T0 + 12 * h
    assert len(d) == (d.timestamps[-1] - d.timestamps[0]) // 600 + 1


def test_fuse_disjoint():
    ch = _channels({"default": (T0, T0 + 3600), Channel.HUMIDITY: (T0 + 7200, T0 + 9000)})
    with pytest.raises(EmptyIntersection):
        fuse(ch)


def test_fuse_missing_channel():
    ch = _channels({"default": (T0, T0 + 3600)})
    del ch[Channel.HUMIDITY]
    with pytest.raises(MissingChannel) as exc:
        fuse(ch)
    assert exc.value.kind == "humidity"


def _csv(rows):
    return "timestamp,value\n" + "".join(f"{t},{v}\n" for t, v in rows)


def test_fuse_hostel_fixture():
    # first rows of a hostel meter; local time is IST
    windows = [4196.86, 4265.65, 4162.51, 4730.01, 4169.19]
    occ = [40, 56, 56, 60, 61]
    start = parse_timestamp("2014-02-15 18:50", IST)
    energy = []
    for w, total in enumerate(windows):
        for m in range(10):
            t = start + 600 * w + 60 * m
            energy.append((t, total / 10))

    energy_csv = _csv((iso(t), v) for t, v in energy)
    occ_csv = _csv((iso(start + 600 * i), v) for i, v in enumerate(occ))
    weather_t = [parse_timestamp("2014-02-15 18:30", IST) + 1800 * i for i in range(4)]
    temp_csv = _csv((iso(t), 11) for t in weather_t)
    hum_csv = _csv((iso(t), 100) for t in weather_t)
    cal_csv = _csv([("2014-02-15 00:00", 0)])

    channels = {
        Channel.ENERGY: parse_series(energy_csv, "energy"),
        Channel.OCCUPANCY: parse_series(occ_csv, "occupancy"),
        Channel.TEMPERATURE: parse_series(temp_csv, "temperature"),
        Channel.HUMIDITY: parse_series(hum_csv, "humidity"),
        Channel.CALENDAR: parse_series(cal_csv, "calendar", IST),
    }
    d = fuse(channels, 600, IST)
    assert len(d) == 5
    assert d.timestamps[0] == start
    np.testing.assert_allclose(d.energy, windows, rtol=0, atol=1e-9)
    assert d.occupancy.tolist() == occ
    assert d.temperature.tolist() == [11.0] * 5
    assert d.humidity.tolist() == [100.0] * 5
    assert d.calendar.tolist() == [0.0] * 5


def test_fused_dataset_invariants(small_academic):
    d = small_academic
    assert not np.isnan(d.matrix()).any()
    assert np.all(np.diff(d.timestamps) == 600)
    assert len(d) == (d.timestamps[-1] - d.timestamps[0]) // 600 + 1


def test_calendar_follows_local_day():
    # a flag for local day D must cover late UTC hours of the previous UTC day
    day = parse_timestamp("2014-02-17 00:00", IST)  # local midnight, UTC 18:30 the day before
    ch = _channels({"default": (day - 3600, day + 3600)})
    ch[Channel.CALENDAR] = RawSeries("calendar", [day - 86400, day], [0.0, 1.0])
    d = fuse(ch, 600, IST)
    local = d.timestamps >= day
    assert d.calendar[local].tolist() == [1.0] * int(local.sum())
    assert d.calendar[~local].tolist() == [0.0] * int((~local).sum())


def test_csv_round_trip(small_academic):
    d = small_academic.rows(range(0, 200))
    again = AlignedDataset.from_csv(d.to_csv())
    assert np.array_equal(again.matrix(), d.matrix())
    assert np.array_equal(again.timestamps, d.timestamps)
    assert again.to_csv() == d.to_csv()

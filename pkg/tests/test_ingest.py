import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from energycast.errors import (
    CalendarNotBinary,
    DataError,
    EmptyFile,
    MalformedTimestamp,
    NegativeValue,
    NonMonotonicTimestamps,
    NonNumericValue,
)
from energycast.ingest import (
    Channel,
    RawSeries,
    ValidatedSeries,
    format_timestamp,
    parse_series,
    parse_timestamp,
    serialize_series,
    validate_series,
)


def test_parse_single_point():
    s = parse_series(b"timestamp,value\n2014-02-15T18:50:00Z,4196.86\n", Channel.ENERGY)
    assert len(s) == 1
    assert s.values[0] == 4196.86
    assert s.unit == "Wh"
    assert s.timestamps[0] == parse_timestamp("2014-02-15T18:50:00Z")
    assert s.interval_native is None


def test_header_only_is_empty():
    with pytest.raises(EmptyFile):
        parse_series("timestamp,value\n", "energy")
    with pytest.raises(EmptyFile):
        parse_series("", "energy")


def test_bad_header():
    with pytest.raises(DataError):
        parse_series("time,val\n2014-01-01T00:00:00Z,1\n", "energy")


def test_malformed_timestamp_reports_line():
    with pytest.raises(MalformedTimestamp) as exc:
        parse_series("timestamp,value\n2014-01-01T00:00:00Z,1\nyesterday,2\n", "energy")
    assert exc.value.line == 3


def test_non_numeric_value_reports_line():
    with pytest.raises(NonNumericValue) as exc:
        parse_series("timestamp,value\n2014-01-01T00:00:00Z,abc\n", "occupancy")
    assert exc.value.line == 2
    with pytest.raises(NonNumericValue):
        parse_series("timestamp,value\n2014-01-01T00:00:00Z,inf\n", "occupancy")


def test_missing_cells_kept():
    s = parse_series("timestamp,value\n2014-01-01T00:00:00Z,\n2014-01-01T00:10:00Z,3\n", "occupancy")
    assert math.isnan(s.values[0]) and s.values[1] == 3
    assert s.missing.tolist() == [True, False]


def test_equal_timestamps_parse_but_fail_validation():
    text = "timestamp,value\n2014-01-01T00:00:00Z,1\n2014-01-01T00:00:00Z,2\n"
    s = parse_series(text, "energy")
    assert len(s) == 2
    with pytest.raises(NonMonotonicTimestamps) as exc:
        validate_series(s)
    assert exc.value.index == 1


def test_local_time_with_offset():
    # naive local time read with a fixed offset east of UTC
    assert parse_timestamp("2014-02-15 18:50", 19800) == parse_timestamp("2014-02-15T13:20:00Z")
    # explicit offsets win over the default
    assert parse_timestamp("2014-02-15T18:50:00+05:30", 0) == parse_timestamp("2014-02-15T13:20:00Z")


def test_modal_gap():
    t0 = 1_400_000_000
    ts = [t0, t0 + 60, t0 + 120, t0 + 240, t0 + 300]
    s = validate_series(RawSeries("energy", ts, [1.0] * 5))
    assert isinstance(s, ValidatedSeries)
    assert s.interval_native == 60


def test_negative_occupancy_rejected():
    with pytest.raises(NegativeValue) as exc:
        validate_series(RawSeries("occupancy", [0, 600, 1200], [3.0, -1.0, 2.0]))
    assert exc.value.index == 1


def test_calendar_not_binary():
    with pytest.raises(CalendarNotBinary) as exc:
        validate_series(RawSeries("calendar", [0, 86400], [1.0, 2.0]))
    assert exc.value.index == 1


def test_negative_temperature_allowed():
    validate_series(RawSeries("temperature", [0, 1800], [-5.0, 3.0]))


def test_unit_must_match_channel():
    with pytest.raises(DataError):
        RawSeries("energy", [0], [1.0], unit="count")


def test_validate_does_not_mutate():
    s = RawSeries("energy", [0, 60, 120], [1.0, math.nan, 2.0])
    v = validate_series(s)
    assert v == s
    assert not v.values.flags.writeable


@settings(max_examples=60, deadline=None)
@given(
    st.lists(
        st.one_of(st.none(), st.floats(0, 1e9, allow_nan=False, allow_infinity=False)),
        min_size=1,
        max_size=30,
    ),
    st.integers(1, 3600),
)
def test_round_trip(vals, step):
    ts = 1_388_534_400 + step * np.arange(len(vals))
    values = [math.nan if v is None else v for v in vals]
    s = RawSeries("energy", ts, values)
    again = parse_series(serialize_series(s), "energy")
    assert again == s
    assert serialize_series(again) == serialize_series(s)


def test_format_timestamp():
    assert format_timestamp(0) == "1970-01-01T00:00:00Z"

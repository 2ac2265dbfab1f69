"""Per-channel sensor CSV parsing and validation.

A channel file has a ``timestamp,value`` header followed by one reading per
line. Timestamps are ISO-8601; naive ones are read as local time at a fixed
UTC offset. Everything is stored internally as integer UTC epoch seconds, and
missing readings are kept as NaN so that interpolation can see them.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone

import numpy as np

from .errors import (
    CalendarNotBinary,
    DataError,
    EmptyFile,
    MalformedTimestamp,
    NegativeValue,
    NonMonotonicTimestamps,
    NonNumericValue,
)

MISSING_TOKENS = frozenset({"", "nan", "NaN", "NA", "null"})


class Channel(str, enum.Enum):
    ENERGY = "energy"
    OCCUPANCY = "occupancy"
    TEMPERATURE = "temperature"
    HUMIDITY = "humidity"
    CALENDAR = "calendar"

    @property
    def unit(self) -> str:
        return UNITS[self]


UNITS = {
    Channel.ENERGY: "Wh",
    Channel.OCCUPANCY: "count",
    Channel.TEMPERATURE: "°C",
    Channel.HUMIDITY: "relative",
    Channel.CALENDAR: "binary",
}


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class RawSeries:
    """One sensor channel as parsed from disk.

    ``timestamps`` are UTC epoch seconds (int64) and ``values`` are float64
    with NaN marking a missing reading. ``interval_native`` is the modal gap
    between consecutive timestamps, or None for fewer than two points.
    """

    channel: Channel
    timestamps: np.ndarray
    values: np.ndarray
    unit: str = ""
    interval_native: int | None = field(default=None)

    def __post_init__(self):
        channel = Channel(self.channel)
        object.__setattr__(self, "channel", channel)
        unit = self.unit or channel.unit
        if unit != channel.unit:
            raise DataError(f"unit {unit!r} does not match channel {channel.value}")
        object.__setattr__(self, "unit", unit)
        ts = _frozen(self.timestamps, np.int64)
        vals = _frozen(self.values, np.float64)
        if ts.ndim != 1 or ts.shape != vals.shape:
            raise DataError("timestamps and values must be 1-D arrays of equal length")
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "values", vals)
        if self.interval_native is None and len(ts) > 1:
            object.__setattr__(self, "interval_native", modal_gap(ts))

    def __len__(self):
        return len(self.timestamps)

    def __eq__(self, other):
        if not isinstance(other, RawSeries):
            return NotImplemented
        return (
            self.channel == other.channel
            and self.unit == other.unit
            and self.interval_native == other.interval_native
            and np.array_equal(self.timestamps, other.timestamps)
            and np.array_equal(self.values, other.values, equal_nan=True)
        )

    @property
    def missing(self) -> np.ndarray:
        return np.isnan(self.values)

    def replace(self, timestamps, values, interval_native=None):
        """Return a series of the same channel (and class) with new points."""
        return type(self)(self.channel, timestamps, values, self.unit, interval_native)


class ValidatedSeries(RawSeries):
    """A RawSeries whose ordering and range invariants have been checked."""


def modal_gap(timestamps) -> int | None:
    """Most frequent gap between consecutive timestamps; ties go to the smallest."""
    gaps = np.diff(np.asarray(timestamps, dtype=np.int64))
    if gaps.size == 0:
        return None
    counts = Counter(gaps.tolist())
    best = max(counts.values())
    return int(min(g for g, c in counts.items() if c == best))


def parse_timestamp(text: str, utc_offset: int = 0) -> int:
    """Parse an ISO-8601 timestamp into UTC epoch seconds.

    Naive timestamps are local time at ``utc_offset`` seconds east of UTC.
    """
    s = text.strip()
    if s.endswith(("Z", "z")):
        s = s[:-1] + "+00:00"
    dt = datetime.fromisoformat(s)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone(timedelta(seconds=utc_offset)))
    return math.floor(dt.timestamp())


def format_timestamp(epoch: int) -> str:
    return datetime.fromtimestamp(int(epoch), tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def parse_series(data: bytes | str, channel: Channel | str, utc_offset: int = 0) -> RawSeries:
    """Parse a ``timestamp,value`` CSV into a :class:`RawSeries`.

    Rows are kept in file order; ordering is checked by
    :func:`validate_series`, not here.
    """
    channel = Channel(channel)
    text = data.decode("utf-8") if isinstance(data, (bytes, bytearray)) else data
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != ["timestamp", "value"]:
        if header is None:
            raise EmptyFile("file is empty")
        raise DataError(f"expected header 'timestamp,value', got {','.join(header)!r}")

    stamps, values = [], []
    for lineno, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != 2:
            raise DataError(f"line {lineno}: expected 2 fields, got {len(row)}")
        ts_text, val_text = row
        try:
            stamps.append(parse_timestamp(ts_text, utc_offset))
        except ValueError:
            raise MalformedTimestamp(lineno, ts_text) from None
        val_text = val_text.strip()
        if val_text in MISSING_TOKENS:
            values.append(math.nan)
            continue
        try:
            v = float(val_text)
        except ValueError:
            raise NonNumericValue(lineno, val_text) from None
        if not math.isfinite(v):
            raise NonNumericValue(lineno, val_text)
        values.append(v)

    if not stamps:
        raise EmptyFile("no data rows")
    return RawSeries(channel, stamps, values)


def serialize_series(s: RawSeries) -> bytes:
    """Inverse of :func:`parse_series` (values written with full precision)."""
    lines = ["timestamp,value"]
    for t, v in zip(s.timestamps.tolist(), s.values.tolist()):
        lines.append(f"{format_timestamp(t)},{'' if math.isnan(v) else repr(v)}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def validate_series(s: RawSeries) -> ValidatedSeries:
    """Check monotonicity and per-channel value ranges.

    Values are never altered; the series is either accepted as-is or an
    error pointing at the first offending index is raised.
    """
    ts = s.timestamps
    if len(ts) > 1:
        bad = np.flatnonzero(np.diff(ts) <= 0)
        if bad.size:
            raise NonMonotonicTimestamps(int(bad[0]) + 1)

    present = ~np.isnan(s.values)
    if s.channel in (Channel.ENERGY, Channel.OCCUPANCY):
        bad = np.flatnonzero(present & (s.values < 0))
        if bad.size:
            raise NegativeValue(int(bad[0]), s.channel.value)
    elif s.channel is Channel.CALENDAR:
        bad = np.flatnonzero(present & (s.values != 0) & (s.values != 1))
        if bad.size:
            raise CalendarNotBinary(int(bad[0]))

    return ValidatedSeries(s.channel, ts, s.values, s.unit, modal_gap(ts))

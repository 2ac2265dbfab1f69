"""Bring multi-rate channels onto one regular grid and fuse them.

Grids are anchored at multiples of the grid interval in UTC epoch seconds, so
a 10-minute grid lands on :00, :10, ... for any whole-hour or half-hour UTC
offset.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DataError,
    EmptyIntersection,
    IncompatibleInterval,
    InsufficientKnownPoints,
    MissingChannel,
)
from .ingest import Channel, RawSeries, ValidatedSeries, format_timestamp, parse_timestamp, validate_series

DAY = 86400
GRID_INTERVAL = 600

FEATURES = ("energy", "occupancy", "temperature", "humidity", "calendar")
CSV_HEADER = ("timestamp", "energy_wh", "occupancy", "temperature_c", "humidity", "calendar")


class Agg(str, enum.Enum):
    SUM = "sum"
    MEAN = "mean"
    LAST = "last"


@dataclass(frozen=True, eq=False)
class AlignedDataset:
    """Fused, fully imputed table on a regular grid.

    Columns are parallel 1-D arrays. ``utc_offset`` (seconds east of UTC)
    defines local days for calendar and lag lookups.
    """

    timestamps: np.ndarray
    energy: np.ndarray
    occupancy: np.ndarray
    temperature: np.ndarray
    humidity: np.ndarray
    calendar: np.ndarray
    grid_interval: int = GRID_INTERVAL
    utc_offset: int = 0

    def __post_init__(self):
        ts = np.array(self.timestamps, dtype=np.int64)
        ts.flags.writeable = False
        object.__setattr__(self, "timestamps", ts)
        for name in FEATURES:
            col = np.array(getattr(self, name), dtype=np.float64)
            if col.shape != ts.shape:
                raise DataError(f"column {name} has shape {col.shape}, expected {ts.shape}")
            col.flags.writeable = False
            object.__setattr__(self, name, col)
        if ts.size > 1 and np.any(np.diff(ts) != self.grid_interval):
            raise DataError("timestamps are not a regular progression at grid_interval")

    def __len__(self):
        return len(self.timestamps)

    def __eq__(self, other):
        if not isinstance(other, AlignedDataset):
            return NotImplemented
        return (
            self.grid_interval == other.grid_interval
            and self.utc_offset == other.utc_offset
            and np.array_equal(self.timestamps, other.timestamps)
            and all(np.array_equal(getattr(self, f), getattr(other, f)) for f in FEATURES)
        )

    def matrix(self) -> np.ndarray:
        """(n, 5) array with columns in ``FEATURES`` order."""
        return np.column_stack([getattr(self, f) for f in FEATURES])

    @classmethod
    def from_matrix(cls, timestamps, matrix, grid_interval=GRID_INTERVAL, utc_offset=0):
        matrix = np.asarray(matrix, dtype=np.float64)
        return cls(timestamps, *matrix.T, grid_interval=grid_interval, utc_offset=utc_offset)

    def rows(self, sl) -> "AlignedDataset":
        """Contiguous row slice (a ``slice`` or ``range``)."""
        if isinstance(sl, range):
            sl = slice(sl.start, sl.stop)
        return AlignedDataset(
            self.timestamps[sl],
            *(getattr(self, f)[sl] for f in FEATURES),
            grid_interval=self.grid_interval,
            utc_offset=self.utc_offset,
        )

    def local_day(self) -> np.ndarray:
        return (self.timestamps + self.utc_offset) // DAY

    def local_seconds(self) -> np.ndarray:
        """Seconds since local midnight for every row."""
        return (self.timestamps + self.utc_offset) % DAY

    def to_csv(self) -> bytes:
        out = io.StringIO()
        out.write(",".join(CSV_HEADER) + "\n")
        cols = [getattr(self, f).tolist() for f in FEATURES]
        for i, t in enumerate(self.timestamps.tolist()):
            e, oc, temp, hum, cal = (c[i] for c in cols)
            out.write(f"{format_timestamp(t)},{e!r},{oc!r},{temp!r},{hum!r},{int(cal)}\n")
        return out.getvalue().encode("utf-8")

    @classmethod
    def from_csv(cls, data, grid_interval=None, utc_offset=0) -> "AlignedDataset":
        text = data.decode("utf-8") if isinstance(data, (bytes, bytearray)) else data
        reader = csv.reader(io.StringIO(text))
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != CSV_HEADER:
            raise DataError(f"fused CSV must start with header {','.join(CSV_HEADER)}")
        stamps, rows = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(CSV_HEADER):
                raise DataError(f"line {lineno}: expected {len(CSV_HEADER)} fields")
            try:
                stamps.append(parse_timestamp(row[0], utc_offset))
                rows.append([float(v) for v in row[1:]])
            except ValueError as exc:
                raise DataError(f"line {lineno}: {exc}") from None
        if not rows:
            raise DataError("fused CSV has no rows")
        mat = np.array(rows, dtype=np.float64)
        if np.isnan(mat).any():
            raise DataError("fused CSV contains missing values")
        if grid_interval is None:
            grid_interval = int(stamps[1] - stamps[0]) if len(stamps) > 1 else GRID_INTERVAL
        return cls.from_matrix(stamps, mat, grid_interval=grid_interval, utc_offset=utc_offset)


def _ensure_validated(s: RawSeries) -> ValidatedSeries:
    return s if isinstance(s, ValidatedSeries) else validate_series(s)


def downsample(s: ValidatedSeries, target: int, agg: Agg | str = Agg.SUM) -> ValidatedSeries:
    """Aggregate into windows ``[t, t + target)`` anchored at multiples of ``target``.

    A window with no present input is emitted as missing.
    """
    agg = Agg(agg)
    native = s.interval_native
    if target <= 0 or (native is not None and target % native != 0):
        raise IncompatibleInterval(native, target)
    if len(s) == 0:
        return s.replace([], [], target)

    win = s.timestamps // target
    first = int(win[0])
    idx = (win - first).astype(np.intp)
    nwin = int(idx[-1]) + 1
    present = ~np.isnan(s.values)
    pidx, pval = idx[present], s.values[present]
    counts = np.bincount(pidx, minlength=nwin)

    if agg is Agg.LAST:
        out = np.full(nwin, np.nan)
        # ts are sorted, so the first hit in reversed order is the last in window
        rev_w, rev_pos = np.unique(pidx[::-1], return_index=True)
        out[rev_w] = pval[::-1][rev_pos]
    else:
        sums = np.bincount(pidx, weights=pval, minlength=nwin)
        with np.errstate(invalid="ignore", divide="ignore"):
            out = sums if agg is Agg.SUM else sums / counts
        out = np.where(counts > 0, out, np.nan)

    stamps = (first + np.arange(nwin, dtype=np.int64)) * target
    return s.replace(stamps, out, target)


def upsample(s: ValidatedSeries, target: int) -> ValidatedSeries:
    """Spread points onto a finer grid; inserted points are missing."""
    native = s.interval_native
    if target <= 0 or (native is not None and native % target != 0):
        raise IncompatibleInterval(native, target)
    if len(s) <= 1 or native == target:
        return s.replace(s.timestamps, s.values, native if native is not None else None)
    offsets = s.timestamps - s.timestamps[0]
    if np.any(offsets % target):
        raise IncompatibleInterval(native, target)
    n = int(offsets[-1] // target) + 1
    out = np.full(n, np.nan)
    out[offsets // target] = s.values
    stamps = s.timestamps[0] + np.arange(n, dtype=np.int64) * target
    return s.replace(stamps, out, target)


def time_interpolate(s: ValidatedSeries) -> ValidatedSeries:
    """Fill missing points linearly in time; hold the end values beyond the known range."""
    known = ~np.isnan(s.values)
    if known.sum() < 2:
        raise InsufficientKnownPoints(f"{s.channel.value}: need at least two known points")
    if known.all():
        return s
    t = s.timestamps.astype(np.float64)
    vals = s.values.copy()
    miss = ~known
    vals[miss] = np.interp(t[miss], t[known], s.values[known])
    return s.replace(s.timestamps, vals, s.interval_native)


def _to_grid(s: ValidatedSeries, grid: int, agg: Agg):
    """Resample onto the grid; returns (series, coverage_start, coverage_end)."""
    native = s.interval_native
    if native is not None and native > grid:
        if s.channel is Channel.ENERGY:
            raise IncompatibleInterval(native, grid)
        g = upsample(s, grid)
        if g.timestamps[0] % grid:
            raise IncompatibleInterval(native, grid)
        return time_interpolate(g), int(g.timestamps[0]), int(g.timestamps[-1])

    g = downsample(s, grid, agg)
    start, end = int(g.timestamps[0]), int(g.timestamps[-1])
    if agg is Agg.SUM and native is not None and native < grid:
        # only windows fully covered by the raw span count toward the span
        if s.timestamps[0] > start:
            start += grid
        if end + grid - native > s.timestamps[-1]:
            end -= grid
    if np.isnan(g.values).any():
        g = time_interpolate(g)
    return g, start, end


def _calendar_on_grid(cal: ValidatedSeries, stamps: np.ndarray, utc_offset: int) -> np.ndarray:
    """Day-level flag for each grid stamp, looked up by local day.

    Days without their own flag inherit the most recent earlier flag; days
    before the first flag take the first flag.
    """
    present = ~np.isnan(cal.values)
    if not present.any():
        raise InsufficientKnownPoints("calendar has no values")
    days = (cal.timestamps[present] + utc_offset) // DAY
    vals = cal.values[present]
    # last flag wins when a day carries several
    keep = np.append(days[1:] != days[:-1], True)
    days, vals = days[keep], vals[keep]
    pos = np.searchsorted(days, (stamps + utc_offset) // DAY, side="right") - 1
    return vals[np.clip(pos, 0, None)]


def fuse(channels: dict, grid_interval: int = GRID_INTERVAL, utc_offset: int = 0) -> AlignedDataset:
    """Fuse all five channels over the intersection of their time spans.

    Energy is summed per window, occupancy takes the last reading, temperature
    and humidity are upsampled and time-interpolated, and the calendar flag is
    carried forward through each day.
    """
    by_kind = {Channel(k): v for k, v in channels.items()}
    for kind in Channel:
        if kind not in by_kind:
            raise MissingChannel(kind.value)
    series = {k: _ensure_validated(v) for k, v in by_kind.items()}
    for k, s in series.items():
        if len(s) == 0:
            raise EmptyIntersection(f"channel {k.value} is empty")

    gridded, starts, ends = {}, [], []
    plan = {
        Channel.ENERGY: Agg.SUM,
        Channel.OCCUPANCY: Agg.LAST,
        Channel.TEMPERATURE: Agg.MEAN,
        Channel.HUMIDITY: Agg.MEAN,
    }
    for kind, agg in plan.items():
        g, start, end = _to_grid(series[kind], grid_interval, agg)
        gridded[kind] = g
        starts.append(start)
        ends.append(end)

    cal = series[Channel.CALENDAR]
    first_day = (int(cal.timestamps[0]) + utc_offset) // DAY
    starts.append(first_day * DAY - utc_offset)
    last_day = (int(cal.timestamps[-1]) + utc_offset) // DAY
    ends.append((last_day + 1) * DAY - utc_offset - grid_interval)

    start = math.ceil(max(starts) / grid_interval) * grid_interval
    end = (min(ends) // grid_interval) * grid_interval
    if start > end:
        raise EmptyIntersection("channel time spans do not overlap")
    stamps = np.arange(start, end + grid_interval, grid_interval, dtype=np.int64)

    cols = {}
    for kind, g in gridded.items():
        idx = (stamps - g.timestamps[0]) // grid_interval
        cols[kind.value] = g.values[idx]
    cols["calendar"] = _calendar_on_grid(cal, stamps, utc_offset)
    return AlignedDataset(
        stamps, **cols, grid_interval=grid_interval, utc_offset=utc_offset
    )

"""Seeded synthetic building data with the native rates of the real sensors.

Energy arrives every minute, occupancy every 10 minutes, temperature and
humidity every 30 minutes and the working-day calendar once a day. Energy in
each 10-minute window is a fixed function of the other channels at the start
of that window::

    base + occ_coupling * OC + temp_coupling * max(0, T - temp_threshold)
         + workday_load * C + offday_load * (1 - C)

split evenly over the window's ten minutes, each minute then scaled by
``1 + noise * N(0, 1)`` and clipped at zero. T is the temperature linearly
interpolated to the 10-minute grid, exactly as fusion does it.

The occupancy shapes are invented: a double daytime peak on working days for
academic buildings, night-heavy occupancy for hostels, meal-time peaks for
dining and a small constant crew for facilities. The academic profile also
has a term recess (Mar 30 to May 5): the calendar still marks weekdays as
working days, but only a skeleton staff shows up, so occupancy falls to
``recess_occupancy`` of its usual level.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from datetime import datetime, timezone

import numpy as np

from .errors import InvalidProfile
from .ingest import Channel, RawSeries

DAY = 86400
GRID = 600
DEFAULT_START = int(datetime(2014, 1, 1, tzinfo=timezone.utc).timestamp())


class BuildingKind(str, enum.Enum):
    ACADEMIC = "academic"
    HOSTEL = "hostel"
    DINING = "dining"
    FACILITIES = "facilities"


@dataclass(frozen=True)
class BuildingProfile:
    kind: BuildingKind
    base_load: float  # Wh per 10-minute window
    occ_coupling: float  # Wh per person per window
    temp_coupling: float  # Wh per degree above threshold per window
    temp_threshold: float = 24.0
    workday_load: float = 0.0
    offday_load: float = 0.0
    peak_occupancy: float = 300.0
    holiday_rate: float = 0.05  # chance a weekday is non-working
    noise: float = 0.05
    # (first day-of-year, length in days) blocks, zero-based from Jan 1, repeated yearly
    recess: tuple = ()
    recess_occupancy: float = 0.15  # occupancy multiplier during a recess

    def __post_init__(self):
        object.__setattr__(self, "kind", BuildingKind(self.kind))
        loads = (self.base_load, self.occ_coupling, self.temp_coupling, self.workday_load,
                 self.offday_load, self.peak_occupancy)
        if any(v < 0 for v in loads):
            raise InvalidProfile("loads, couplings and occupancy must be non-negative")
        if not 0 <= self.noise <= 0.5:
            raise InvalidProfile(f"noise fraction {self.noise} outside [0, 0.5]")
        if not 0 <= self.holiday_rate <= 1:
            raise InvalidProfile("holiday_rate must lie in [0, 1]")
        if not 0 <= self.recess_occupancy <= 1:
            raise InvalidProfile("recess_occupancy must lie in [0, 1]")
        object.__setattr__(self, "recess", tuple((int(a), int(b)) for a, b in self.recess))
        if any(a < 0 or a > 365 or b < 0 for a, b in self.recess):
            raise InvalidProfile(f"bad recess blocks {self.recess}")


PROFILES = {
    BuildingKind.ACADEMIC: BuildingProfile(
        BuildingKind.ACADEMIC, base_load=300.0, occ_coupling=8.0, temp_coupling=40.0,
        temp_threshold=26.0, workday_load=250.0, peak_occupancy=300.0,
        recess=((88, 37),),
    ),
    BuildingKind.HOSTEL: BuildingProfile(
        BuildingKind.HOSTEL, base_load=800.0, occ_coupling=12.0, temp_coupling=30.0,
        temp_threshold=26.0, offday_load=300.0, peak_occupancy=250.0,
    ),
    BuildingKind.DINING: BuildingProfile(
        BuildingKind.DINING, base_load=500.0, occ_coupling=4.0, temp_coupling=120.0,
        temp_threshold=22.0, peak_occupancy=200.0,
    ),
    BuildingKind.FACILITIES: BuildingProfile(
        BuildingKind.FACILITIES, base_load=2000.0, occ_coupling=0.0, temp_coupling=150.0,
        temp_threshold=22.0, peak_occupancy=5.0, holiday_rate=0.0,
    ),
}


def profile(kind, **overrides) -> BuildingProfile:
    """Built-in profile for ``kind`` with optional field overrides."""
    return replace(PROFILES[BuildingKind(kind)], **overrides)


def _bump(hours, center, width):
    return np.exp(-0.5 * ((hours - center) / width) ** 2)


def occupancy_shape(kind: BuildingKind, hours, working):
    """Fraction of peak occupancy by hour of day (0..24) and working flag."""
    working = np.asarray(working, dtype=bool)
    if kind is BuildingKind.ACADEMIC:
        day = 0.9 * _bump(hours, 11.0, 1.6) + 0.8 * _bump(hours, 15.5, 1.8)
        return np.where(working, 0.03 + day, 0.02 + 0.12 * _bump(hours, 13.0, 2.5))
    if kind is BuildingKind.HOSTEL:
        night = 0.85 - 0.6 * _bump(hours, 13.0, 3.5)
        return np.where(working, night, 0.75 - 0.2 * _bump(hours, 14.0, 3.0))
    if kind is BuildingKind.DINING:
        meals = _bump(hours, 8.0, 0.8) + _bump(hours, 13.0, 0.9) + _bump(hours, 20.5, 1.0)
        return 0.05 + 0.9 * meals * np.where(working, 1.0, 0.7)
    return np.full(np.shape(hours), 0.85)


def _smooth_noise(rng, n, scale, phi):
    """Stationary AR(1) noise with marginal standard deviation ``scale``."""
    e = rng.normal(0.0, scale * np.sqrt(1 - phi * phi), size=n)
    out = np.empty(n)
    acc = rng.normal(0.0, scale)
    for i in range(n):
        acc = phi * acc + e[i]
        out[i] = acc
    return out


def synth_building(p: BuildingProfile, days: int, seed: int = 42, start: int = DEFAULT_START):
    """Generate the five raw channels for ``days`` whole days from ``start`` (UTC midnight).

    Returns a dict ``Channel -> RawSeries``.
    """
    if days < 1:
        raise InvalidProfile("days must be >= 1")
    if start % DAY:
        raise InvalidProfile("start must be a UTC midnight")
    rng = np.random.default_rng(seed)
    n_grid = days * 144

    # calendar: weekends off, plus random weekday holidays
    day_starts = start + DAY * np.arange(days, dtype=np.int64)
    weekday = np.array([datetime.fromtimestamp(int(t), tz=timezone.utc).weekday() for t in day_starts])
    working = (weekday < 5) & (rng.random(days) >= p.holiday_rate)
    calendar = working.astype(np.float64)

    # occupancy on the 10-minute grid
    grid = start + GRID * np.arange(n_grid, dtype=np.int64)
    hours = ((grid - start) % DAY) / 3600.0
    day_idx = np.arange(n_grid) // 144
    day_scale = rng.uniform(0.85, 1.15, size=days)
    day_scale[in_recess(p, day_starts)] *= p.recess_occupancy
    day_factor = day_scale[day_idx]
    shape = occupancy_shape(p.kind, hours, working[day_idx])
    occ = p.peak_occupancy * shape * day_factor * (1.0 + _smooth_noise(rng, n_grid, 0.05, 0.9))
    occupancy = np.maximum(np.round(occ), 0.0)

    # weather on the 30-minute grid, one extra point closing the last day
    n_weather = days * 48 + 1
    wt = start + 1800 * np.arange(n_weather, dtype=np.int64)
    doy = (wt - DEFAULT_START) / DAY
    wh = ((wt - start) % DAY) / 3600.0
    wday = np.minimum(np.arange(n_weather) // 48, days - 1)
    temp = (
        25.0
        + 6.0 * np.sin(2 * np.pi * (doy - 100.0) / 365.0)
        + 5.0 * np.sin(2 * np.pi * (wh - 9.0) / 24.0)
        + rng.normal(0.0, 1.5, size=days)[wday]
        + _smooth_noise(rng, n_weather, 0.4, 0.8)
    )
    temp = np.round(temp, 2)
    humidity = np.clip(np.round(60.0 - 2.0 * (temp - 25.0) + _smooth_noise(rng, n_weather, 3.0, 0.9), 1), 5.0, 100.0)

    t_grid = np.interp(grid.astype(np.float64), wt.astype(np.float64), temp)
    cal_grid = calendar[day_idx]
    window_wh = energy_function(p, occupancy, t_grid, cal_grid)

    per_minute = np.repeat(window_wh / 10.0, 10)
    if p.noise > 0:
        per_minute = per_minute * (1.0 + p.noise * rng.normal(size=per_minute.size))
    per_minute = np.maximum(per_minute, 0.0)
    minutes = start + 60 * np.arange(n_grid * 10, dtype=np.int64)

    return {
        Channel.ENERGY: RawSeries(Channel.ENERGY, minutes, per_minute),
        Channel.OCCUPANCY: RawSeries(Channel.OCCUPANCY, grid, occupancy),
        Channel.TEMPERATURE: RawSeries(Channel.TEMPERATURE, wt, temp),
        Channel.HUMIDITY: RawSeries(Channel.HUMIDITY, wt, humidity),
        Channel.CALENDAR: RawSeries(Channel.CALENDAR, day_starts, calendar),
    }


def in_recess(p: BuildingProfile, day_starts) -> np.ndarray:
    """Flag days (given as UTC midnights) that fall inside a recess block."""
    flags = np.zeros(len(day_starts), dtype=bool)
    if not p.recess:
        return flags
    doy = np.array(
        [datetime.fromtimestamp(int(t), tz=timezone.utc).timetuple().tm_yday - 1 for t in day_starts]
    )
    for first, length in p.recess:
        flags |= (doy >= first) & (doy < first + length)
    return flags


def energy_function(p: BuildingProfile, occupancy, temperature, calendar):
    """Noise-free energy per 10-minute window."""
    return (
        p.base_load
        + p.occ_coupling * occupancy
        + p.temp_coupling * np.maximum(0.0, temperature - p.temp_threshold)
        + p.workday_load * calendar
        + p.offday_load * (1.0 - calendar)
    )

"""Model inputs: min-max scaling, chronological splits, lag tables, sequences.

Also the univariate feature scoring and correlation tables used for
feature-importance reports.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .align import FEATURES, AlignedDataset
from .errors import (
    DataError,
    EmptyInput,
    InsufficientHistory,
    TooFewRows,
    WindowTooLong,
    ZeroVariance,
    ZeroVarianceTarget,
)

# energy is both an input feature and the target
TARGET = "energy"
EXOGENOUS = ("occupancy", "temperature", "humidity", "calendar")
SCORE_CAP = 1e300
DEFAULT_RATIOS = (0.70, 0.15, 0.15)


class EmptyValidation(UserWarning):
    """The chronological split left the validation range empty."""


@dataclass(frozen=True)
class NormalizationParams:
    """Per-feature min/max in ``FEATURES`` order; the target shares energy's entry."""

    mins: tuple
    maxs: tuple

    def __post_init__(self):
        if len(self.mins) != len(FEATURES) or len(self.maxs) != len(FEATURES):
            raise DataError(f"expected {len(FEATURES)} min/max pairs")
        if any(hi < lo for lo, hi in zip(self.mins, self.maxs)):
            raise DataError("max < min in normalization params")

    @property
    def target_range(self) -> tuple[float, float]:
        i = FEATURES.index(TARGET)
        return self.mins[i], self.maxs[i]

    def as_arrays(self):
        return np.array(self.mins, dtype=np.float64), np.array(self.maxs, dtype=np.float64)

    def to_dict(self):
        return {"features": list(FEATURES), "min": list(self.mins), "max": list(self.maxs)}

    @classmethod
    def from_dict(cls, d):
        if list(d["features"]) != list(FEATURES):
            raise DataError("normalization features do not match")
        return cls(tuple(map(float, d["min"])), tuple(map(float, d["max"])))


def _as_matrix(x):
    if isinstance(x, AlignedDataset):
        return x.matrix()
    m = np.asarray(x, dtype=np.float64)
    return m.reshape(1, -1) if m.ndim == 1 else m


def fit_scaler(train_rows) -> NormalizationParams:
    """Per-feature min and max over the given (training) rows only."""
    m = _as_matrix(train_rows)
    if m.shape[0] == 0:
        raise EmptyInput("cannot fit a scaler on zero rows")
    return NormalizationParams(tuple(m.min(axis=0).tolist()), tuple(m.max(axis=0).tolist()))


def _scale(p: NormalizationParams):
    lo, hi = p.as_arrays()
    span = hi - lo
    return lo, span, span > 0


def transform(x, p: NormalizationParams):
    """Min-max scale; degenerate features (max == min) map to 0.

    Accepts an AlignedDataset (returns one) or an (n, 5) array.
    """
    m = _as_matrix(x)
    lo, span, ok = _scale(p)
    out = np.zeros_like(m)
    out[:, ok] = (m[:, ok] - lo[ok]) / span[ok]
    if isinstance(x, AlignedDataset):
        return AlignedDataset.from_matrix(x.timestamps, out, x.grid_interval, x.utc_offset)
    return out


def inverse_transform(x, p: NormalizationParams):
    m = _as_matrix(x)
    lo, span, _ = _scale(p)
    out = m * span + lo
    if isinstance(x, AlignedDataset):
        return AlignedDataset.from_matrix(x.timestamps, out, x.grid_interval, x.utc_offset)
    return out


def scale_target(y, p: NormalizationParams):
    lo, hi = p.target_range
    y = np.asarray(y, dtype=np.float64)
    return (y - lo) / (hi - lo) if hi > lo else np.zeros_like(y)


def unscale_target(y, p: NormalizationParams):
    lo, hi = p.target_range
    return np.asarray(y, dtype=np.float64) * (hi - lo) + lo


@dataclass(frozen=True)
class SplitIndices:
    train: range
    val: range
    test: range

    @property
    def sizes(self):
        return len(self.train), len(self.val), len(self.test)


def chronological_split(d, ratios=DEFAULT_RATIOS) -> SplitIndices:
    """Contiguous train/val/test ranges in time order.

    Sizes are ``floor(r0 * n)``, ``floor(r1 * n)`` and the remainder.
    """
    n = len(d) if not isinstance(d, int) else d
    if n < 3:
        raise TooFewRows(f"need at least 3 rows to split, got {n}")
    r0, r1 = ratios[0], ratios[1]
    if r0 < 0 or r1 < 0 or r0 + r1 > 1 + 1e-12:
        raise DataError(f"invalid split ratios {ratios}")
    # guard against 0.7 * n landing a hair below an integer
    n_train = math.floor(r0 * n + 1e-9)
    n_val = math.floor(r1 * n + 1e-9)
    if n_val == 0:
        warnings.warn(f"validation split is empty for n={n}", EmptyValidation, stacklevel=2)
    return SplitIndices(
        range(0, n_train), range(n_train, n_train + n_val), range(n_train + n_val, n)
    )


@dataclass(frozen=True)
class SupervisedTable:
    """Tabular rows for the shallow models.

    ``X`` columns are occupancy, temperature, humidity, calendar, then
    ``lag_1 .. lag_k`` (most recent matching day first). ``rows`` holds the
    dataset row of each target and ``lag_rows`` the source row of each lag.
    """

    X: np.ndarray
    y: np.ndarray
    rows: np.ndarray
    lag_rows: np.ndarray

    @property
    def columns(self):
        return list(EXOGENOUS) + [f"lag_{j + 1}" for j in range(self.lag_rows.shape[1])]

    def __len__(self):
        return len(self.y)

    def select(self, mask) -> "SupervisedTable":
        return SupervisedTable(self.X[mask], self.y[mask], self.rows[mask], self.lag_rows[mask])

    def in_rows(self, r: range) -> "SupervisedTable":
        return self.select((self.rows >= r.start) & (self.rows < r.stop))


def lag_features(d: AlignedDataset, k: int = 3) -> SupervisedTable:
    """Energy at the same clock time on the ``k`` previous days of the same calendar type.

    Candidate days lacking a row at exactly that clock time are skipped.
    Rows with fewer than ``k`` matching earlier days are dropped.
    """
    if k < 1:
        raise DataError("k must be >= 1")
    n = len(d)
    clock = d.local_seconds()
    cal = d.calendar
    day = d.local_day()
    # rows sharing (clock time, calendar flag), in time order; lag j is j entries back
    order = np.lexsort((d.timestamps, cal, clock))
    key_clock, key_cal = clock[order], cal[order]
    lag_rows = np.full((n, k), -1, dtype=np.int64)
    for j in range(1, k + 1):
        same = np.zeros(n, dtype=bool)
        same[j:] = (key_clock[j:] == key_clock[:-j]) & (key_cal[j:] == key_cal[:-j])
        src = np.full(n, -1, dtype=np.int64)
        src[j:] = order[:-j]
        lag_rows[order, j - 1] = np.where(same, src, -1)

    valid = np.all(lag_rows >= 0, axis=1)
    # with one row per (day, clock) the group entries are on strictly earlier days
    valid &= np.all(day[np.clip(lag_rows, 0, None)] < day[:, None], axis=1)
    rows = np.flatnonzero(valid)
    if rows.size == 0:
        raise InsufficientHistory(f"no row has {k} earlier matching days")
    lr = lag_rows[rows]
    X = np.column_stack([getattr(d, f)[rows] for f in EXOGENOUS] + [d.energy[lr]])
    return SupervisedTable(X, d.energy[rows].copy(), rows, lr)


@dataclass(frozen=True)
class SequenceDataset:
    """Windows of ``W`` consecutive feature rows and the energy that follows.

    ``X`` has shape (samples, W, 5); ``target_rows`` are dataset rows of ``y``.
    """

    X: np.ndarray
    y: np.ndarray
    target_rows: np.ndarray

    @property
    def window(self) -> int:
        return self.X.shape[1]

    def __len__(self):
        return len(self.y)

    def select(self, mask) -> "SequenceDataset":
        return SequenceDataset(self.X[mask], self.y[mask], self.target_rows[mask])

    def in_rows(self, r: range, context_from: int | None = None) -> "SequenceDataset":
        """Samples whose target lies in ``r``.

        If ``context_from`` is given, also require the whole window to start
        at or after that row.
        """
        t = self.target_rows
        mask = (t >= r.start) & (t < r.stop)
        if context_from is not None:
            mask &= t - self.window >= context_from
        return self.select(mask)


def windowize(d, W: int = 6) -> SequenceDataset:
    """Sliding windows over an AlignedDataset (or an (n, 5) matrix in ``FEATURES`` order)."""
    m = _as_matrix(d)
    n = m.shape[0]
    if W < 1:
        raise DataError("window length must be >= 1")
    if n <= W:
        raise WindowTooLong(f"window {W} needs more than {W} rows, got {n}")
    X = np.lib.stride_tricks.sliding_window_view(m[:-1], W, axis=0).transpose(0, 2, 1)
    y = m[W:, FEATURES.index(TARGET)]
    return SequenceDataset(np.ascontiguousarray(X), y.copy(), np.arange(W, n))


def pearson_r(x, y) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    xc, yc = x - x.mean(), y - y.mean()
    sx, sy = np.sqrt(xc @ xc), np.sqrt(yc @ yc)
    if sx == 0 or sy == 0:
        return math.nan
    return float(np.clip((xc @ yc) / (sx * sy), -1.0, 1.0))


def f_scores(columns: dict, target) -> list[tuple[str, float]]:
    """Univariate regression F-statistic per column, sorted descending.

    ``F = r^2 (n - 2) / (1 - r^2)``; perfect correlation is capped at
    ``SCORE_CAP`` and constant columns score 0. Ties keep input order.
    """
    target = np.asarray(target, dtype=np.float64)
    n = target.size
    if n < 3:
        raise TooFewRows("feature scoring needs at least 3 rows")
    if np.ptp(target) == 0:
        raise ZeroVarianceTarget("target is constant")
    scored = []
    for name, col in columns.items():
        r = pearson_r(col, target)
        if math.isnan(r):
            score = 0.0
        elif r * r >= 1.0:
            score = SCORE_CAP
        else:
            score = min(r * r * (n - 2) / (1 - r * r), SCORE_CAP)
        scored.append((name, score))
    return sorted(scored, key=lambda kv: -kv[1])


def feature_scores(d: AlignedDataset) -> list[tuple[str, float]]:
    return f_scores({f: getattr(d, f) for f in EXOGENOUS}, d.energy)


def correlations(d: AlignedDataset) -> dict[str, float]:
    """Pearson r between energy and each exogenous feature."""
    if len(d) < 3:
        raise TooFewRows("correlations need at least 3 rows")
    if np.ptp(d.energy) == 0:
        raise ZeroVariance(TARGET)
    out = {}
    for f in EXOGENOUS:
        r = pearson_r(getattr(d, f), d.energy)
        if math.isnan(r):
            raise ZeroVariance(f)
        out[f] = r
    return out


def scores_csv(scores) -> bytes:
    lines = ["feature,score"] + [f"{name},{score!r}" for name, score in scores]
    return ("\n".join(lines) + "\n").encode()


def correlations_csv(corr: dict) -> bytes:
    lines = ["feature,r"] + [f"{name},{r!r}" for name, r in corr.items()]
    return ("\n".join(lines) + "\n").encode()

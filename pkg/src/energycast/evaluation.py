"""Metrics and report builders.

Reports carry MAE both in normalized units and in Wh (normalized MAE times
the energy range of the training scaler).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import forecast
from .align import DAY, AlignedDataset
from .errors import (
    KTooLarge,
    LengthExceedsData,
    LengthMismatch,
    SpanExceedsData,
    ZeroVarianceTarget,
)
from .features import DEFAULT_RATIOS, chronological_split
from .ingest import format_timestamp

# calendar units as whole days
DEFAULT_SPANS = (("1 day", 1), ("1 week", 7), ("1 month", 30), ("6 months", 182), ("1 year", 365))
DEFAULT_LENGTHS = (("1 year", 365), ("6 months", 182), ("3 months", 90), ("2 months", 60), ("1 month", 30))


def _pair(y, yhat):
    y = np.asarray(y, dtype=np.float64).ravel()
    yhat = np.asarray(yhat, dtype=np.float64).ravel()
    if y.shape != yhat.shape:
        raise LengthMismatch(f"{y.size} actual values vs {yhat.size} predictions")
    return y, yhat


def r2(y, yhat) -> float:
    """Coefficient of determination, ``1 - SS_res / SS_tot``."""
    y, yhat = _pair(y, yhat)
    if y.size < 2:
        raise LengthMismatch("r2 needs at least two values")
    dev = y - y.mean()
    ss_tot = dev @ dev
    if ss_tot == 0:
        raise ZeroVarianceTarget("actual values are constant")
    res = y - yhat
    return float(1.0 - (res @ res) / ss_tot)


def mae(y, yhat) -> float:
    y, yhat = _pair(y, yhat)
    if y.size < 1:
        raise LengthMismatch("mae needs at least one value")
    return float(np.mean(np.abs(y - yhat)))


@dataclass(frozen=True)
class EvalEntry:
    label: str
    r2: float
    mae_norm: float
    mae_wh: float
    rows: range | None = None


@dataclass
class EvalReport:
    entries: list[EvalEntry] = field(default_factory=list)

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, label):
        for e in self.entries:
            if e.label == label:
                return e
        raise KeyError(label)

    @property
    def labels(self):
        return [e.label for e in self.entries]

    def average(self, label="Average") -> EvalEntry:
        n = len(self.entries)
        return EvalEntry(
            label,
            sum(e.r2 for e in self.entries) / n,
            sum(e.mae_norm for e in self.entries) / n,
            sum(e.mae_wh for e in self.entries) / n,
        )

    def to_csv(self) -> bytes:
        lines = ["label,r2,mae_norm,mae_wh"]
        lines += [f"{e.label},{e.r2!r},{e.mae_norm!r},{e.mae_wh!r}" for e in self.entries]
        return ("\n".join(lines) + "\n").encode()


def score(label: str, p: forecast.Prediction, rows: range | None = None) -> EvalEntry:
    return EvalEntry(
        label,
        r2(p.actual_norm, p.predicted_norm),
        mae(p.actual_norm, p.predicted_norm),
        mae(p.actual_wh, p.predicted_wh),
        rows,
    )


def _rows_for(days: float, d: AlignedDataset) -> int:
    return int(round(days * DAY / d.grid_interval))


def horizon_report(a, d: AlignedDataset, test_rows: range, spans=DEFAULT_SPANS) -> EvalReport:
    """Score the model on the first span-worth of ``test_rows`` for each span.

    ``spans`` are ``(label, days)`` pairs; row sets of longer spans contain
    those of shorter ones.
    """
    need = {label: _rows_for(days, d) for label, days in spans}
    for label, n in need.items():
        if n > len(test_rows):
            raise SpanExceedsData(label, len(test_rows))
    pred = forecast.predict(a, d, test_rows)
    report = EvalReport()
    for label, n in need.items():
        rows = range(test_rows.start, test_rows.start + n)
        report.entries.append(score(label, pred.first(rows.stop), rows))
    return report


def ablation_report(d: AlignedDataset, lengths, kind: str, config: dict, ratios=DEFAULT_RATIOS) -> EvalReport:
    """Train on the last length-worth of rows before the validation split.

    Every entry is scored on the same test split. ``lengths`` are
    ``(label, days)`` pairs.
    """
    split = chronological_split(d, ratios)
    plans = []
    for label, days in lengths:
        n = _rows_for(days, d)
        if n > split.val.start:
            raise LengthExceedsData(label, split.val.start)
        plans.append((label, range(split.val.start - n, split.val.start)))
    report = EvalReport()
    for label, train in plans:
        art = forecast.fit(d, train, kind, config)
        report.entries.append(score(label, forecast.predict(art, d, split.test), train))
    return report


def building_report(datasets: dict, kind: str, config: dict, ratios=DEFAULT_RATIOS) -> EvalReport:
    """One test-split entry per building followed by their plain average."""
    report = EvalReport()
    for name, d in datasets.items():
        split = chronological_split(d, ratios)
        art = forecast.fit(d, split.train, kind, config)
        report.entries.append(score(name, forecast.predict(art, d, split.test), split.test))
    report.entries.append(report.average())
    return report


def mae_bars(datasets: dict, configs: dict, ratios=DEFAULT_RATIOS) -> list[tuple[str, str, float]]:
    """Normalized test MAE per (building, model kind); ``configs`` maps kind -> config."""
    rows = []
    for name, d in datasets.items():
        split = chronological_split(d, ratios)
        for kind, cfg in configs.items():
            art = forecast.fit(d, split.train, kind, cfg)
            p = forecast.predict(art, d, split.test)
            rows.append((name, kind, mae(p.actual_norm, p.predicted_norm)))
    return rows


def mae_bars_csv(rows) -> bytes:
    lines = ["building,model,mae_norm"] + [f"{b},{m},{v!r}" for b, m, v in rows]
    return ("\n".join(lines) + "\n").encode()


def forecast_overlay(a, d: AlignedDataset, test_rows: range, first_k: int = 300):
    """First ``first_k`` test rows as ``(timestamp, actual_wh, predicted_wh)``."""
    pred = forecast.predict(a, d, test_rows)
    if first_k < 1 or first_k > len(pred):
        raise KTooLarge(f"asked for {first_k} rows, {len(pred)} available")
    return list(
        zip(
            pred.timestamps[:first_k].tolist(),
            pred.actual_wh[:first_k].tolist(),
            pred.predicted_wh[:first_k].tolist(),
        )
    )


def overlay_csv(rows) -> bytes:
    lines = ["timestamp,actual_wh,predicted_wh"]
    lines += [f"{format_timestamp(t)},{act!r},{pred!r}" for t, act, pred in rows]
    return ("\n".join(lines) + "\n").encode()

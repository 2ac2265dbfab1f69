"""Train any of the four model kinds on a row range and predict another.

This is the glue between the feature builders and the regressors: the
scaler is fitted on the training rows only, tabular models get the
calendar-matched lag table, and the LSTM gets sliding windows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .align import AlignedDataset
from .errors import DataError, EmptyDataset
from .features import fit_scaler, lag_features, scale_target, transform, unscale_target, windowize
from .models import (
    LstmConfig,
    ModelArtifact,
    forest_fit,
    forest_predict,
    lstm_predict,
    ridge_fit,
    ridge_predict,
    train_lstm,
    tree_fit,
    tree_predict,
)

KINDS = ("ridge", "tree", "forest", "lstm")

# optima reported for the real buildings
DEFAULT_HYPER = {
    "ridge": {"alpha": 1.0},
    "tree": {"max_depth": 14, "min_samples_split": 20},
    "forest": {"n_estimators": 500, "max_depth": None, "min_samples_split": 2},
    "lstm": {"units": 32, "dense": 5, "batch": 64, "epochs": 20, "lr": 0.001, "rho": 0.9},
}
DEFAULT_WINDOW = 6
DEFAULT_LAGS = 3


def model_config(kind: str, hyper: dict | None = None, seed: int = 42, window=None, lags=None) -> dict:
    """Complete config for ``kind``: defaults overlaid with ``hyper``."""
    if kind not in KINDS:
        raise DataError(f"unknown model kind {kind!r}; expected one of {KINDS}")
    hyper = dict(hyper or {})
    unknown = set(hyper) - set(DEFAULT_HYPER[kind])
    if unknown:
        raise DataError(f"unknown {kind} hyperparameters: {sorted(unknown)}")
    cfg = {**DEFAULT_HYPER[kind], **hyper, "seed": int(seed)}
    if kind == "lstm":
        cfg["window"] = int(window or DEFAULT_WINDOW)
    else:
        cfg["lags"] = int(lags or DEFAULT_LAGS)
    return cfg


@dataclass(frozen=True)
class Prediction:
    rows: np.ndarray
    timestamps: np.ndarray
    actual_norm: np.ndarray
    predicted_norm: np.ndarray
    actual_wh: np.ndarray
    predicted_wh: np.ndarray

    def __len__(self):
        return len(self.rows)

    def first(self, stop_row: int) -> "Prediction":
        """Entries whose row index is below ``stop_row``."""
        m = self.rows < stop_row
        return Prediction(*(getattr(self, f)[m] for f in self.__dataclass_fields__))


def fit(d: AlignedDataset, train_rows: range, kind: str, config: dict) -> ModelArtifact:
    """Fit ``kind`` on ``train_rows`` of ``d`` with a complete ``config``."""
    if len(train_rows) == 0:
        raise EmptyDataset("empty training range")
    norm = fit_scaler(d.rows(train_rows))
    history = []
    dn = transform(d, norm)
    hp = {k: v for k, v in config.items() if k not in ("seed", "window", "lags")}
    seed = config["seed"]

    if kind == "lstm":
        seq = windowize(dn, config["window"]).in_rows(train_rows, context_from=train_rows.start)
        if len(seq) == 0:
            raise EmptyDataset("training range shorter than the LSTM window")
        result = train_lstm(seq, LstmConfig(seed=seed, **hp))
        model, history = result.model, result.history
    else:
        table = lag_features(dn, config["lags"]).in_rows(train_rows)
        if len(table) == 0:
            raise EmptyDataset("no training rows have full lag history")
        if kind == "ridge":
            model = ridge_fit(table.X, table.y, hp["alpha"])
        elif kind == "tree":
            model = tree_fit(table.X, table.y, hp["max_depth"], hp["min_samples_split"])
        else:
            model = forest_fit(table.X, table.y, hp["n_estimators"], seed,
                               hp["max_depth"], hp["min_samples_split"])
    return ModelArtifact(kind, model, dict(config), norm, history)


def predict(a: ModelArtifact, d: AlignedDataset, rows: range) -> Prediction:
    """Predict every row in ``rows`` that has the inputs the model needs.

    Inputs may reach back before ``rows`` (earlier observations are fair
    game); targets never leak into their own inputs.
    """
    dn = transform(d, a.normalization)
    if a.kind == "lstm":
        seq = windowize(dn, a.config["window"]).in_rows(rows)
        pred = lstm_predict(a.model, seq.X)
        target_rows = seq.target_rows
    else:
        table = lag_features(dn, a.config["lags"]).in_rows(rows)
        fn = {"ridge": ridge_predict, "tree": tree_predict, "forest": forest_predict}[a.kind]
        pred = fn(a.model, table.X) if len(table) else np.zeros(0)
        target_rows = table.rows
    actual_wh = d.energy[target_rows]
    return Prediction(
        target_rows,
        d.timestamps[target_rows],
        scale_target(actual_wh, a.normalization),
        pred,
        actual_wh,
        unscale_target(pred, a.normalization),
    )

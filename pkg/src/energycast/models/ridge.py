"""Ridge regression solved in closed form."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DataError, DimensionMismatch


@dataclass
class RidgeModel:
    weights: np.ndarray
    intercept: float
    alpha: float

    @property
    def n_parameters(self) -> int:
        return len(self.weights) + 1


def _check_xy(X, y):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    y = np.asarray(y, dtype=np.float64).ravel()
    if X.ndim != 2 or X.shape[0] != y.shape[0] or X.shape[0] < 1:
        raise DimensionMismatch(f"X has shape {X.shape} but y has {y.shape[0]} entries")
    return X, y


def ridge_fit(X, y, alpha: float = 1.0, fit_intercept: bool = True) -> RidgeModel:
    """Minimise ``||y - Xw - b||^2 + alpha ||w||^2`` with ``b`` unpenalised.

    The intercept is removed by centering, then ``(Xc'Xc + alpha I) w = Xc'yc``
    is solved directly. With ``alpha == 0`` and a singular Gram matrix the
    minimum-norm least-squares solution is returned instead.
    """
    if alpha < 0:
        raise DataError("alpha must be >= 0")
    X, y = _check_xy(X, y)
    if fit_intercept:
        x_mean, y_mean = X.mean(axis=0), y.mean()
    else:
        x_mean, y_mean = np.zeros(X.shape[1]), 0.0
    Xc, yc = X - x_mean, y - y_mean
    A = Xc.T @ Xc + alpha * np.eye(X.shape[1])
    try:
        w = np.linalg.solve(A, Xc.T @ yc)
    except np.linalg.LinAlgError:
        w = np.linalg.lstsq(Xc, yc, rcond=None)[0]
    b = float(y_mean - x_mean @ w)
    return RidgeModel(w, b, float(alpha))


def ridge_predict(m: RidgeModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if X.ndim != 2 or X.shape[1] != len(m.weights):
        raise DimensionMismatch(f"expected {len(m.weights)} features, got shape {X.shape}")
    return X @ m.weights + m.intercept

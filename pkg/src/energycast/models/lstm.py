"""Single-layer LSTM regressor trained with BPTT and RMSProp, in plain numpy.

Architecture: an LSTM layer over the input window, two tanh dense layers on
the final hidden state, and a linear scalar head.

Parameter layout (``H`` hidden units, ``D`` input features)::

    lstm_W   (H + D, 4H)   rows: recurrent part first, then input part
    lstm_b   (4H,)         gate blocks in order input, forget, output, candidate
    dense1_W (H, U1),  dense1_b (U1,)
    dense2_W (U1, U2), dense2_b (U2,)
    out_W    (U2, 1),  out_b    (1,)
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ..errors import (
    DataError,
    DivergedTraining,
    EmptyDataset,
    NonFiniteInput,
    ShapeMismatch,
    StaleCache,
)

PARAM_NAMES = (
    "lstm_W", "lstm_b", "dense1_W", "dense1_b", "dense2_W", "dense2_b", "out_W", "out_b",
)
GATES = ("input", "forget", "output", "candidate")


def _sigmoid(x):
    # tanh form avoids overflow warnings for large |x|
    return 0.5 * (1.0 + np.tanh(0.5 * x))


@dataclass
class LstmModel:
    input_dim: int
    units: int
    dense: tuple[int, int]
    params: dict[str, np.ndarray]

    @property
    def n_parameters(self) -> int:
        return int(sum(p.size for p in self.params.values()))

    def gate(self, name: str):
        """(recurrent weights, input weights, bias) of one gate."""
        k = GATES.index(name)
        H = self.units
        W, b = self.params["lstm_W"], self.params["lstm_b"]
        cols = slice(k * H, (k + 1) * H)
        return W[:H, cols], W[H:, cols], b[cols]

    def shapes(self) -> dict[str, tuple]:
        H, D = self.units, self.input_dim
        u1, u2 = self.dense
        return {
            "lstm_W": (H + D, 4 * H), "lstm_b": (4 * H,),
            "dense1_W": (H, u1), "dense1_b": (u1,),
            "dense2_W": (u1, u2), "dense2_b": (u2,),
            "out_W": (u2, 1), "out_b": (1,),
        }


def init_lstm(input_dim: int = 5, units: int = 32, dense=(5, 5), seed=0) -> LstmModel:
    """Uniform(+-sqrt(1/fan_in)) weights, zero biases, forget-gate bias 1."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    dense = tuple(int(u) for u in dense)
    m = LstmModel(int(input_dim), int(units), dense, {})
    for name, shape in m.shapes().items():
        if name.endswith("_W"):
            limit = math.sqrt(1.0 / shape[0])
            m.params[name] = rng.uniform(-limit, limit, size=shape)
        else:
            m.params[name] = np.zeros(shape)
    m.params["lstm_b"][units : 2 * units] = 1.0
    return m


def lstm_forward(m: LstmModel, X):
    """Predictions for a batch of sequences shaped (batch, steps, features).

    Returns ``(predictions, cache)``; the cache holds every intermediate
    needed by :func:`lstm_backward`.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 3 or X.shape[2] != m.input_dim:
        raise ShapeMismatch(f"expected (batch, steps, {m.input_dim}), got {X.shape}")
    if not np.isfinite(X).all():
        raise NonFiniteInput("input sequences contain NaN or inf")
    p = m.params
    B, T, _ = X.shape
    H = m.units
    W, b = p["lstm_W"], p["lstm_b"]
    Wh = W[:H]

    zx = X @ W[H:] + b  # (B, T, 4H)
    hs = np.zeros((T + 1, B, H))
    cs = np.zeros((T + 1, B, H))
    acts = np.empty((T, B, 4 * H))  # activated gates i, f, o, g
    tcs = np.empty((T, B, H))
    for t in range(T):
        z = zx[:, t] + hs[t] @ Wh
        a = acts[t]
        a[:, : 3 * H] = _sigmoid(z[:, : 3 * H])
        a[:, 3 * H :] = np.tanh(z[:, 3 * H :])
        i, f, o, g = a[:, :H], a[:, H : 2 * H], a[:, 2 * H : 3 * H], a[:, 3 * H :]
        cs[t + 1] = f * cs[t] + i * g
        tcs[t] = np.tanh(cs[t + 1])
        hs[t + 1] = o * tcs[t]

    a1 = np.tanh(hs[T] @ p["dense1_W"] + p["dense1_b"])
    a2 = np.tanh(a1 @ p["dense2_W"] + p["dense2_b"])
    y = (a2 @ p["out_W"] + p["out_b"])[:, 0]
    cache = {
        "X": X, "hs": hs, "cs": cs, "acts": acts, "tcs": tcs, "a1": a1, "a2": a2,
        "params": dict(p),
    }
    return y, cache


def lstm_backward(m: LstmModel, cache, loss_grad) -> dict[str, np.ndarray]:
    """Gradients of the batch loss given ``loss_grad = dL/dprediction``.

    Raises StaleCache if the model's parameter arrays were replaced after the
    forward pass that produced ``cache``.
    """
    p = m.params
    if any(p[k] is not cache["params"].get(k) for k in PARAM_NAMES):
        raise StaleCache("model parameters changed since the forward pass")
    X, hs, cs, acts, tcs = cache["X"], cache["hs"], cache["cs"], cache["acts"], cache["tcs"]
    a1, a2 = cache["a1"], cache["a2"]
    dy = np.asarray(loss_grad, dtype=np.float64).reshape(-1)
    B, T, D = X.shape
    if dy.shape[0] != B:
        raise ShapeMismatch(f"loss_grad has {dy.shape[0]} entries for a batch of {B}")
    H = m.units
    W = p["lstm_W"]
    Wh = W[:H]

    g = {}
    g["out_W"] = a2.T @ dy[:, None]
    g["out_b"] = np.array([dy.sum()])
    dz2 = (dy[:, None] @ p["out_W"].T) * (1.0 - a2 * a2)
    g["dense2_W"] = a1.T @ dz2
    g["dense2_b"] = dz2.sum(axis=0)
    dz1 = (dz2 @ p["dense2_W"].T) * (1.0 - a1 * a1)
    g["dense1_W"] = hs[T].T @ dz1
    g["dense1_b"] = dz1.sum(axis=0)

    dh = dz1 @ p["dense1_W"].T
    dc = np.zeros((B, H))
    dZ = np.empty((B, T, 4 * H))
    for t in range(T - 1, -1, -1):
        a = acts[t]
        i, f, o, gg = a[:, :H], a[:, H : 2 * H], a[:, 2 * H : 3 * H], a[:, 3 * H :]
        tc = tcs[t]
        dc = dc + dh * o * (1.0 - tc * tc)
        dz = dZ[:, t]
        dz[:, :H] = dc * gg * i * (1.0 - i)
        dz[:, H : 2 * H] = dc * cs[t] * f * (1.0 - f)
        dz[:, 2 * H : 3 * H] = dh * tc * o * (1.0 - o)
        dz[:, 3 * H :] = dc * i * (1.0 - gg * gg)
        dc = dc * f
        dh = dz @ Wh.T

    flat = dZ.reshape(B * T, 4 * H)
    h_prev = hs[:T].transpose(1, 0, 2).reshape(B * T, H)
    g["lstm_W"] = np.vstack([h_prev.T @ flat, X.reshape(B * T, D).T @ flat])
    g["lstm_b"] = flat.sum(axis=0)
    return g


@dataclass
class RmspropState:
    acc: dict[str, np.ndarray]
    lr: float = 0.001
    rho: float = 0.9
    eps: float = 1e-8

    @classmethod
    def zeros_like(cls, params, lr=0.001, rho=0.9, eps=1e-8):
        return cls({k: np.zeros_like(v) for k, v in params.items()}, lr, rho, eps)


def rmsprop_step(params, grads, state: RmspropState):
    """One RMSProp update; returns new ``(params, state)`` without mutating inputs.

    ``acc <- rho * acc + (1 - rho) * g^2``;
    ``param <- param - lr * g / sqrt(acc + eps)``.
    """
    if params.keys() != grads.keys() or params.keys() != state.acc.keys():
        raise ShapeMismatch("params, grads and accumulators have different keys")
    new_params, new_acc = {}, {}
    for k, w in params.items():
        gk = grads[k]
        if gk.shape != w.shape or state.acc[k].shape != w.shape:
            raise ShapeMismatch(f"{k}: param {w.shape}, grad {gk.shape}, acc {state.acc[k].shape}")
        acc = state.rho * state.acc[k] + (1.0 - state.rho) * gk * gk
        new_acc[k] = acc
        new_params[k] = w - state.lr * gk / np.sqrt(acc + state.eps)
    return new_params, RmspropState(new_acc, state.lr, state.rho, state.eps)


@dataclass
class LstmConfig:
    units: int = 32
    dense: tuple[int, int] = (5, 5)
    batch: int = 64
    epochs: int = 20
    lr: float = 0.001
    rho: float = 0.9
    eps: float = 1e-8
    seed: int = 42

    def __post_init__(self):
        if isinstance(self.dense, int):
            self.dense = (self.dense, self.dense)
        self.dense = tuple(int(u) for u in self.dense)
        if self.units < 1 or min(self.dense) < 1 or self.batch < 1 or self.epochs < 1:
            raise DataError(f"invalid LSTM config {self}")
        if not (self.lr > 0 and 0 <= self.rho < 1 and self.eps >= 0):
            raise DataError(f"invalid optimizer settings in {self}")

    def to_dict(self):
        d = asdict(self)
        d["dense"] = list(self.dense)
        return d


@dataclass
class TrainResult:
    model: LstmModel
    history: list[float] = field(default_factory=list)


def train_lstm(data, cfg: LstmConfig | None = None) -> TrainResult:
    """Mini-batch RMSProp on the MAE loss.

    ``data`` is anything with ``X`` (samples, W, features) and ``y``. Batches
    come from a fresh seeded shuffle every epoch; the last partial batch is
    kept. ``history`` holds the mean training MAE of each epoch.
    """
    cfg = cfg or LstmConfig()
    X = np.asarray(data.X, dtype=np.float64)
    y = np.asarray(data.y, dtype=np.float64)
    n = len(y)
    if n == 0:
        raise EmptyDataset("no training sequences")
    rng = np.random.default_rng(cfg.seed)
    m = init_lstm(X.shape[2], cfg.units, cfg.dense, rng)
    state = RmspropState.zeros_like(m.params, cfg.lr, cfg.rho, cfg.eps)
    history = []
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, cfg.batch):
            idx = order[start : start + cfg.batch]
            pred, cache = lstm_forward(m, X[idx])
            resid = pred - y[idx]
            total += float(np.abs(resid).sum())
            # np.sign(0) == 0 gives the zero subgradient at a perfect fit
            grads = lstm_backward(m, cache, np.sign(resid) / len(idx))
            m.params, state = rmsprop_step(m.params, grads, state)
        loss = total / n
        if not math.isfinite(loss):
            raise DivergedTraining(f"non-finite loss at epoch {epoch + 1}")
        history.append(loss)
    if not all(np.isfinite(v).all() for v in m.params.values()):
        raise DivergedTraining("non-finite parameters after training")
    return TrainResult(m, history)


def lstm_predict(m: LstmModel, X, chunk: int = 8192) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    out = [lstm_forward(m, X[s : s + chunk])[0] for s in range(0, len(X), chunk)]
    return np.concatenate(out) if out else np.zeros(0)

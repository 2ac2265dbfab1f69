"""Trained-model container and its binary file format.

Layout (all integers little-endian)::

    magic     4 bytes  b"DECM"
    version   u16      FORMAT_VERSION
    kind      u8       0 ridge, 1 tree, 2 forest, 3 lstm
    config    u32 length + UTF-8 JSON (sorted keys)
    params    u32 count, then per array:
                u16 name length + UTF-8 name,
                u8 dtype (0 float64, 1 int64), u8 ndim, ndim x u64 dims,
                raw little-endian data in C order
    norm      u8 present flag, then if present:
                u32 count, per feature: u16 name length + name, f64 min, f64 max

See docs/model_format.md for the per-kind parameter names.
"""

from __future__ import annotations

import io
import json
import struct
from dataclasses import dataclass, field

import numpy as np

from ..align import FEATURES
from ..errors import FormatError, UnsupportedVersion
from ..features import NormalizationParams
from .forest import RandomForest
from .lstm import LstmModel
from .ridge import RidgeModel
from .tree import DecisionTree

MAGIC = b"DECM"
FORMAT_VERSION = 1
KINDS = ("ridge", "tree", "forest", "lstm")
TREE_ARRAYS = ("feature", "threshold", "left", "right", "value", "n_samples", "sse")
_DTYPES = {0: np.dtype("<f8"), 1: np.dtype("<i8")}


@dataclass
class ModelArtifact:
    """A trained model plus everything needed to reuse it.

    ``config`` holds the hyperparameters, the feature layout (``window`` for
    the LSTM, ``lags`` for the tabular models) and the seed.
    """

    kind: str
    model: object
    config: dict = field(default_factory=dict)
    normalization: NormalizationParams | None = None
    # per-epoch training loss; kept in memory only, not written to disk
    history: list = field(default_factory=list, compare=False)

    @property
    def n_parameters(self) -> int:
        return self.model.n_parameters


def _model_arrays(kind, model) -> tuple[dict, dict]:
    if kind == "ridge":
        return {"weights": model.weights, "intercept": np.array([model.intercept])}, {
            "alpha": model.alpha
        }
    if kind == "tree":
        return {k: getattr(model, k) for k in TREE_ARRAYS}, {
            "n_features": model.n_features,
            "max_depth": model.max_depth,
            "min_samples_split": model.min_samples_split,
        }
    if kind == "forest":
        arrays = {}
        for i, t in enumerate(model.trees):
            arrays.update({f"t{i}.{k}": getattr(t, k) for k in TREE_ARRAYS})
        t0 = model.trees[0]
        return arrays, {
            "n_estimators": model.n_estimators,
            "seed": model.seed,
            "bootstrap": model.bootstrap,
            "max_features": model.max_features,
            "tree_seeds": model.tree_seeds,
            "n_features": t0.n_features,
            "max_depth": t0.max_depth,
            "min_samples_split": t0.min_samples_split,
        }
    if kind == "lstm":
        return dict(model.params), {
            "input_dim": model.input_dim, "units": model.units, "dense": list(model.dense)
        }
    raise FormatError(f"unknown model kind {kind!r}")


def _tree_from(arrays, prefix, meta):
    return DecisionTree(
        *(arrays[prefix + k] for k in TREE_ARRAYS),
        n_features=meta["n_features"],
        max_depth=meta["max_depth"],
        min_samples_split=meta["min_samples_split"],
    )


def _build_model(kind, arrays, meta):
    if kind == "ridge":
        return RidgeModel(arrays["weights"], float(arrays["intercept"][0]), meta["alpha"])
    if kind == "tree":
        return _tree_from(arrays, "", meta)
    if kind == "forest":
        trees = [_tree_from(arrays, f"t{i}.", meta) for i in range(meta["n_estimators"])]
        return RandomForest(
            trees, meta["n_estimators"], meta["seed"], meta["bootstrap"],
            meta["max_features"], list(meta["tree_seeds"]),
        )
    return LstmModel(meta["input_dim"], meta["units"], tuple(meta["dense"]), arrays)


def _put_str(buf, s):
    b = s.encode("utf-8")
    buf.write(struct.pack("<H", len(b)))
    buf.write(b)


def save_model(a: ModelArtifact) -> bytes:
    if a.kind not in KINDS:
        raise FormatError(f"unknown model kind {a.kind!r}")
    arrays, meta = _model_arrays(a.kind, a.model)
    config = {"model": meta, "config": a.config}
    buf = io.BytesIO()
    buf.write(MAGIC)
    buf.write(struct.pack("<HB", FORMAT_VERSION, KINDS.index(a.kind)))
    cfg = json.dumps(config, sort_keys=True, separators=(",", ":")).encode("utf-8")
    buf.write(struct.pack("<I", len(cfg)))
    buf.write(cfg)

    buf.write(struct.pack("<I", len(arrays)))
    for name in sorted(arrays):
        arr = np.asarray(arrays[name])
        code = 1 if np.issubdtype(arr.dtype, np.integer) else 0
        arr = np.ascontiguousarray(arr, dtype=_DTYPES[code])
        _put_str(buf, name)
        buf.write(struct.pack("<BB", code, arr.ndim))
        buf.write(struct.pack(f"<{arr.ndim}Q", *arr.shape))
        buf.write(arr.tobytes())

    norm = a.normalization
    buf.write(struct.pack("<B", norm is not None))
    if norm is not None:
        buf.write(struct.pack("<I", len(FEATURES)))
        for name, lo, hi in zip(FEATURES, norm.mins, norm.maxs):
            _put_str(buf, name)
            buf.write(struct.pack("<dd", lo, hi))
    return buf.getvalue()


class _Reader:
    def __init__(self, data):
        self.data = memoryview(data)
        self.pos = 0

    def take(self, n):
        if self.pos + n > len(self.data):
            raise FormatError("truncated model file")
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def string(self):
        (n,) = self.unpack("<H")
        return bytes(self.take(n)).decode("utf-8")


def load_model(data: bytes) -> ModelArtifact:
    r = _Reader(data)
    if bytes(r.take(4)) != MAGIC:
        raise FormatError("not a model file (bad magic)")
    version, kind_tag = r.unpack("<HB")
    if version != FORMAT_VERSION:
        raise UnsupportedVersion(f"model format version {version}, expected {FORMAT_VERSION}")
    if kind_tag >= len(KINDS):
        raise FormatError(f"unknown model kind tag {kind_tag}")
    kind = KINDS[kind_tag]
    (n,) = r.unpack("<I")
    try:
        config = json.loads(bytes(r.take(n)).decode("utf-8"))
    except ValueError as exc:
        raise FormatError(f"bad config block: {exc}") from None

    arrays = {}
    (count,) = r.unpack("<I")
    for _ in range(count):
        name = r.string()
        code, ndim = r.unpack("<BB")
        if code not in _DTYPES:
            raise FormatError(f"unknown dtype code {code}")
        shape = r.unpack(f"<{ndim}Q") if ndim else ()
        dt = _DTYPES[code]
        size = int(np.prod(shape, dtype=np.int64)) * dt.itemsize
        arrays[name] = np.frombuffer(bytes(r.take(size)), dtype=dt).reshape(shape).astype(dt.newbyteorder("="))

    norm = None
    (present,) = r.unpack("<B")
    if present:
        (nf,) = r.unpack("<I")
        names, mins, maxs = [], [], []
        for _ in range(nf):
            names.append(r.string())
            lo, hi = r.unpack("<dd")
            mins.append(lo)
            maxs.append(hi)
        if tuple(names) != FEATURES:
            raise FormatError(f"normalization block has features {names}")
        norm = NormalizationParams(tuple(mins), tuple(maxs))
    if r.pos != len(r.data):
        raise FormatError("trailing bytes after model file")

    try:
        model = _build_model(kind, arrays, config["model"])
    except KeyError as exc:
        raise FormatError(f"model file lacks {exc}") from None
    return ModelArtifact(kind, model, config.get("config", {}), norm)

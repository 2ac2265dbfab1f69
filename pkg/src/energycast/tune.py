"""Randomized search followed by grid refinement, scored on the validation split.

Every trial trains a fresh model on the training split with the same model
seed and is scored by normalized MAE on the validation split. Result tables
are ordered by (MAE, parameter count, config JSON), so the order never
depends on how trials were scheduled.
"""

from __future__ import annotations

import itertools
import json
import math
import time
from dataclasses import dataclass

import numpy as np

from . import forecast
from .align import AlignedDataset
from .errors import DataError, EmptyGrid, EmptySpace
from .evaluation import mae
from .features import SplitIndices, chronological_split


@dataclass(frozen=True)
class IntRange:
    lo: int
    hi: int
    step: int = 1

    def __post_init__(self):
        if self.hi < self.lo or self.step < 1:
            raise EmptySpace(f"empty integer range {self.lo}..{self.hi}")

    def sample(self, rng):
        return int(self.lo + self.step * rng.integers(0, (self.hi - self.lo) // self.step + 1))

    def around(self, center, radius):
        vals = [center + j * self.step for j in range(-radius, radius + 1)]
        return [int(v) for v in vals if self.lo <= v <= self.hi]


@dataclass(frozen=True)
class LogRange:
    lo: float
    hi: float
    factor: float = 10.0  # grid spacing used by refinement

    def __post_init__(self):
        if not (0 < self.lo <= self.hi) or self.factor <= 1:
            raise EmptySpace(f"log range needs 0 < lo <= hi, got {self.lo}..{self.hi}")

    def sample(self, rng):
        return float(math.exp(rng.uniform(math.log(self.lo), math.log(self.hi))))

    def around(self, center, radius):
        vals = [center * self.factor**j for j in range(-radius, radius + 1)]
        # tolerate rounding at the edges of the range
        return [float(v) for v in vals if self.lo * (1 - 1e-9) <= v <= self.hi * (1 + 1e-9)]


@dataclass(frozen=True)
class Choice:
    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        if not self.values:
            raise EmptySpace("empty choice set")

    def sample(self, rng):
        return self.values[int(rng.integers(0, len(self.values)))]

    def around(self, center, radius):
        if center not in self.values:
            return [center] if radius == 0 else []
        i = self.values.index(center)
        return list(self.values[max(0, i - radius) : i + radius + 1])


SearchSpace = dict  # name -> IntRange | LogRange | Choice

DEFAULT_SPACES = {
    "lstm": {
        "units": IntRange(20, 100),
        "dense": IntRange(2, 10),
        "batch": Choice((8, 16, 32, 64, 128, 256, 512)),
        "epochs": IntRange(1, 20),
    },
    "ridge": {"alpha": LogRange(0.001, 1000.0)},
    "tree": {"max_depth": IntRange(1, 20), "min_samples_split": IntRange(2, 30)},
    "forest": {"n_estimators": IntRange(10, 1000)},
}


def grid_size(grid: SearchSpace) -> int:
    return math.prod(len(d.values) for d in grid.values())


@dataclass(frozen=True)
class TrialResult:
    model: str
    config: dict
    val_mae: float
    train_seconds: float
    seed: int
    n_parameters: int

    @property
    def config_json(self) -> str:
        return json.dumps(self.config, sort_keys=True, separators=(",", ":"))

    def sort_key(self):
        return (self.val_mae, self.n_parameters, self.config_json)


def _prepare(d: AlignedDataset, split):
    split = split or chronological_split(d)
    if len(split.val) == 0:
        raise DataError("tuning needs a non-empty validation split")
    return split


def run_trial(d: AlignedDataset, split: SplitIndices, kind: str, hyper: dict, seed: int,
              window=None, lags=None) -> TrialResult:
    cfg = forecast.model_config(kind, hyper, seed, window, lags)
    t0 = time.perf_counter()
    art = forecast.fit(d, split.train, kind, cfg)
    elapsed = time.perf_counter() - t0
    p = forecast.predict(art, d, split.val)
    score = mae(p.actual_norm, p.predicted_norm)
    if not math.isfinite(score):
        raise DataError(f"non-finite validation MAE for {hyper}")
    return TrialResult(kind, dict(hyper), score, elapsed, seed, art.n_parameters)


def random_search(space: SearchSpace, budget: int, seed: int, d: AlignedDataset, kind: str,
                  split: SplitIndices | None = None, window=None, lags=None) -> list[TrialResult]:
    """Train ``budget`` configurations drawn uniformly (log-uniformly for LogRange)."""
    if not space:
        raise EmptySpace("search space has no hyperparameters")
    if budget < 1:
        raise DataError("budget must be >= 1")
    split = _prepare(d, split)
    rng = np.random.default_rng(seed)
    configs = [{name: dom.sample(rng) for name, dom in space.items()} for _ in range(budget)]
    trials = [run_trial(d, split, kind, c, seed, window, lags) for c in configs]
    return sorted(trials, key=TrialResult.sort_key)


def refine_grid(space: SearchSpace, center: dict, radius=2) -> SearchSpace:
    """Finite grid of up to ``radius`` neighbouring values per axis, clipped to ``space``.

    ``radius`` is an int for every axis or a dict per axis (missing axes use 0).
    """
    grid = {}
    for name, dom in space.items():
        r = radius.get(name, 0) if isinstance(radius, dict) else radius
        vals = dom.around(center[name], int(r))
        if not vals:
            raise EmptyGrid(f"{name}: center {center[name]!r} lies outside the space")
        grid[name] = Choice(tuple(vals))
    return grid


def grid_search(grid: SearchSpace, d: AlignedDataset, kind: str, seed: int = 42,
                split: SplitIndices | None = None, window=None, lags=None):
    """Train every grid point; returns ``(best, table)`` with ``table`` sorted best first."""
    if not grid or grid_size(grid) == 0:
        raise EmptyGrid("grid has no points")
    split = _prepare(d, split)
    names = list(grid)
    points = [dict(zip(names, combo)) for combo in itertools.product(*(grid[n].values for n in names))]
    table = sorted(
        (run_trial(d, split, kind, p, seed, window, lags) for p in points),
        key=TrialResult.sort_key,
    )
    return table[0], table


def two_stage_search(space: SearchSpace, budget: int, seed: int, d: AlignedDataset, kind: str,
                     radius=1, split=None, window=None, lags=None):
    """Random exploration, then a grid around its best configuration.

    Returns ``(best, random_table, grid_table)``.
    """
    rand = random_search(space, budget, seed, d, kind, split, window, lags)
    grid = refine_grid(space, rand[0].config, radius)
    best, table = grid_search(grid, d, kind, seed, split, window, lags)
    return best, rand, table


def trials_csv(trials, include_timing: bool = True) -> bytes:
    """``rank,model,config_json,val_mae,train_seconds,seed``; timing is written as 0 when excluded."""
    lines = ["rank,model,config_json,val_mae,train_seconds,seed"]
    for rank, t in enumerate(trials, start=1):
        secs = round(t.train_seconds, 6) if include_timing else 0.0
        cfg = '"' + t.config_json.replace('"', '""') + '"'
        lines.append(f"{rank},{t.model},{cfg},{t.val_mae!r},{secs!r},{t.seed}")
    return ("\n".join(lines) + "\n").encode()

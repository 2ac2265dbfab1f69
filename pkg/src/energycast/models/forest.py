"""Random forest: bootstrap-resampled trees with per-split feature subsets."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import DataError, DimensionMismatch, EmptyInput
from .tree import DecisionTree, tree_fit, tree_predict


@dataclass
class RandomForest:
    trees: list[DecisionTree]
    n_estimators: int
    seed: int
    bootstrap: bool = True
    max_features: int | None = None
    tree_seeds: list[int] = field(default_factory=list)

    @property
    def n_parameters(self) -> int:
        return sum(t.node_count for t in self.trees)


def default_max_features(p: int) -> int:
    return max(1, math.ceil(p / 3))


def forest_fit(
    X,
    y,
    n_estimators: int = 100,
    seed: int = 42,
    max_depth: int | None = None,
    min_samples_split: int = 2,
    bootstrap: bool = True,
    max_features: int | str | None = "third",
) -> RandomForest:
    """Train ``n_estimators`` trees, each on its own seeded bootstrap sample.

    Every tree draws from an independent child of ``SeedSequence(seed)``, so
    trees could be trained in any order (or in parallel) with identical
    results. ``max_features="third"`` means ``ceil(p / 3)``; None uses all
    features.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if n_estimators < 1:
        raise DataError("n_estimators must be >= 1")
    if len(y) == 0:
        raise EmptyInput("cannot fit a forest on zero rows")
    if X.shape[0] != len(y):
        raise DimensionMismatch(f"X has {X.shape[0]} rows but y has {len(y)}")
    n, p = X.shape
    mf = default_max_features(p) if max_features == "third" else max_features

    children = np.random.SeedSequence(seed).spawn(n_estimators)
    trees, tree_seeds = [], []
    for child in children:
        tree_seeds.append(int(child.generate_state(1)[0]))
        rng = np.random.default_rng(child)
        if bootstrap:
            idx = rng.integers(0, n, size=n)
            Xb, yb = X[idx], y[idx]
        else:
            Xb, yb = X, y
        trees.append(tree_fit(Xb, yb, max_depth, min_samples_split, mf, rng))
    return RandomForest(trees, n_estimators, seed, bootstrap, mf, tree_seeds)


def forest_predict(m: RandomForest, X) -> np.ndarray:
    """Arithmetic mean of the member trees' predictions, accumulated in tree order."""
    total = tree_predict(m.trees[0], X).copy()
    for t in m.trees[1:]:
        total += tree_predict(t, X)
    return total / len(m.trees)

"""Greedy CART regression tree with a squared-error criterion.

Nodes are kept in flat parallel arrays (index 0 is the root). A row goes to
the left child when ``x[feature] <= threshold`` and to the right otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DataError, DimensionMismatch, EmptyInput

LEAF = -1


@dataclass
class DecisionTree:
    feature: np.ndarray  # int64, LEAF for leaves
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray  # mean training target of the node
    n_samples: np.ndarray
    sse: np.ndarray  # training squared error around the node mean
    n_features: int
    max_depth: int | None = None
    min_samples_split: int = 2

    @property
    def node_count(self) -> int:
        return len(self.feature)

    @property
    def n_parameters(self) -> int:
        return self.node_count

    @property
    def is_leaf(self) -> np.ndarray:
        return self.feature == LEAF

    def depth(self) -> int:
        depths = np.zeros(self.node_count, dtype=np.int64)
        for i in range(self.node_count):  # children always come after parents
            if self.feature[i] != LEAF:
                depths[self.left[i]] = depths[self.right[i]] = depths[i] + 1
        return int(depths.max())

    def leaf_sse(self) -> float:
        return float(self.sse[self.is_leaf].sum())


def _best_split(X, y, features):
    """Lowest-SSE (feature, threshold, sse) over ``features``, or None.

    Candidates are midpoints between consecutive distinct sorted values.
    Ties go to the lower feature index, then the smaller threshold.
    """
    n = len(y)
    yc = y - y.mean()
    total_sum, total_sq = yc.sum(), yc @ yc
    n_left = np.arange(1, n, dtype=np.float64)
    best = None
    for f in sorted(features):
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        distinct = xs[1:] > xs[:-1]
        if not distinct.any():
            continue
        ys = yc[order]
        cs = np.cumsum(ys)[:-1]
        cq = np.cumsum(ys * ys)[:-1]
        sse = (cq - cs * cs / n_left) + (
            (total_sq - cq) - (total_sum - cs) ** 2 / (n - n_left)
        )
        sse = np.where(distinct, sse, np.inf)
        i = int(np.argmin(sse))
        if best is None or sse[i] < best[2]:
            thr = (xs[i] + xs[i + 1]) / 2.0
            if not thr < xs[i + 1]:  # adjacent floats: midpoint rounds up
                thr = xs[i]
            best = (f, float(thr), float(max(sse[i], 0.0)))
    return best


def tree_fit(
    X,
    y,
    max_depth: int | None = None,
    min_samples_split: int = 2,
    max_features: int | None = None,
    rng: np.random.Generator | None = None,
) -> DecisionTree:
    """Grow a regression tree greedily.

    A node becomes a leaf when it reaches ``max_depth``, holds fewer than
    ``min_samples_split`` samples, is pure, or has no feature with two
    distinct values. With ``max_features`` set, each split draws that many
    candidate features from ``rng`` (falling back to the rest only when none
    of the drawn ones can split).
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if len(y) == 0:
        raise EmptyInput("cannot fit a tree on zero rows")
    if X.shape[0] != len(y):
        raise DimensionMismatch(f"X has {X.shape[0]} rows but y has {len(y)}")
    if max_depth is not None and max_depth < 0:
        raise DataError("max_depth must be >= 0")
    p = X.shape[1]
    if max_features is not None and max_features < p and rng is None:
        raise DataError("max_features needs an rng")

    feature, threshold, left, right, value, count, sse = [], [], [], [], [], [], []

    def new_node(idx):
        yy = y[idx]
        mu = yy.mean()
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        value.append(float(mu))
        count.append(len(idx))
        sse.append(float(((yy - mu) ** 2).sum()))
        return len(feature) - 1

    stack = [(new_node(np.arange(len(y))), np.arange(len(y)), 0)]
    while stack:
        node, idx, depth = stack.pop()
        if (max_depth is not None and depth >= max_depth) or len(idx) < min_samples_split:
            continue
        yy = y[idx]
        if yy.max() == yy.min():
            continue
        Xn = X[idx]
        if max_features is None or max_features >= p:
            split = _best_split(Xn, yy, range(p))
        else:
            perm = rng.permutation(p)
            split = _best_split(Xn, yy, perm[:max_features])
            if split is None:
                split = _best_split(Xn, yy, perm[max_features:])
        if split is None:
            continue
        f, thr, _ = split
        go_left = Xn[:, f] <= thr
        li, ri = idx[go_left], idx[~go_left]
        feature[node], threshold[node] = f, thr
        left[node] = new_node(li)
        right[node] = new_node(ri)
        # right pushed first so the left subtree is numbered first
        stack.append((right[node], ri, depth + 1))
        stack.append((left[node], li, depth + 1))

    return DecisionTree(
        np.array(feature, dtype=np.int64),
        np.array(threshold),
        np.array(left, dtype=np.int64),
        np.array(right, dtype=np.int64),
        np.array(value),
        np.array(count, dtype=np.int64),
        np.array(sse),
        p,
        max_depth,
        min_samples_split,
    )


def apply(m: DecisionTree, X) -> np.ndarray:
    """Leaf index reached by every row."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if X.ndim != 2 or X.shape[1] != m.n_features:
        raise DimensionMismatch(f"expected {m.n_features} features, got shape {X.shape}")
    node = np.zeros(X.shape[0], dtype=np.int64)
    active = np.flatnonzero(m.feature[node] != LEAF)
    while active.size:
        cur = node[active]
        go_right = X[active, m.feature[cur]] > m.threshold[cur]
        node[active] = np.where(go_right, m.right[cur], m.left[cur])
        active = active[m.feature[node[active]] != LEAF]
    return node


def tree_predict(m: DecisionTree, X) -> np.ndarray:
    return m.value[apply(m, X)]

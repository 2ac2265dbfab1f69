"""Reference implementations written independently of the package code.

They favour obviousness over speed: explicit loops, direct formulas and no
shared helpers with ``energycast``.
"""

import numpy as np


def fd_gradients(model, X, weights, forward, h=1e-5):
    """Central differences of ``L = sum(weights * forward(model, X))`` for every parameter entry."""
    grads = {}
    for name, p in model.params.items():
        g = np.zeros_like(p)
        flat = p.reshape(-1)
        for i in range(flat.size):
            old = flat[i]
            flat[i] = old + h
            up = weights @ forward(model, X)[0]
            flat[i] = old - h
            down = weights @ forward(model, X)[0]
            flat[i] = old
            g.reshape(-1)[i] = (up - down) / (2 * h)
        grads[name] = g
    return grads


def relative_error(analytic, numeric, floor=1e-7):
    """Largest ``|a - n| / max(|a|, |n|, floor)`` over all entries."""
    a, n = np.asarray(analytic), np.asarray(numeric)
    return float(np.max(np.abs(a - n) / np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)))


def _sse(v):
    return float(((v - v.mean()) ** 2).sum()) if len(v) else 0.0


def greedy_tree_sse(X, y, depth, min_samples_split=2):
    """Total leaf SSE of a greedy tree grown by trying every (feature, midpoint) split directly."""
    if depth == 0 or len(y) < min_samples_split or np.all(y == y[0]):
        return _sse(y)
    best = None
    for f in range(X.shape[1]):
        vals = sorted(set(X[:, f].tolist()))
        for lo, hi in zip(vals[:-1], vals[1:]):
            thr = (lo + hi) / 2
            left = X[:, f] <= thr
            cost = _sse(y[left]) + _sse(y[~left])
            if best is None or cost < best[0]:
                best = (cost, left)
    if best is None:
        return _sse(y)
    left = best[1]
    return greedy_tree_sse(X[left], y[left], depth - 1, min_samples_split) + greedy_tree_sse(
        X[~left], y[~left], depth - 1, min_samples_split
    )


def ridge_normal_equations(X, y, alpha):
    """Solve the augmented system ``[X 1]`` with penalty ``diag(alpha, ..., alpha, 0)``."""
    n, p = X.shape
    A = np.hstack([X, np.ones((n, 1))])
    P = alpha * np.eye(p + 1)
    P[p, p] = 0.0
    theta = np.linalg.solve(A.T @ A + P, A.T @ y)
    return theta[:p], theta[p]


def r2_loop(y, yhat):
    mean = sum(y) / len(y)
    ss_res = sum((a - b) ** 2 for a, b in zip(y, yhat))
    ss_tot = sum((a - mean) ** 2 for a in y)
    return 1 - ss_res / ss_tot


def mae_loop(y, yhat):
    return sum(abs(a - b) for a, b in zip(y, yhat)) / len(y)

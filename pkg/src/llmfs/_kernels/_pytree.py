"""Pure-numpy tree kernel.

Mirrors ``_ctree.pyx`` operation for operation: same splitmix64 stream, same
node visiting order, same floating-point expressions. Given equal inputs the
two produce bit-identical trees and importances.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


class SplitMix64:
    __slots__ = ("state",)

    def __init__(self, state: int):
        self.state = int(state) & _MASK64

    def next(self) -> int:
        self.state = (self.state + _GOLDEN) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        return self.next() % bound

    def uniform(self) -> float:
        return (self.next() >> 11) * (1.0 / 9007199254740992.0)


def _best_sorted_split(xs: np.ndarray, ys: np.ndarray, p: float):
    """Lowest weighted child Gini over midpoints between distinct sorted values."""
    m = xs.shape[0]
    nl = np.arange(1, m, dtype=np.float64)
    pl = np.cumsum(ys[:-1], dtype=np.float64)
    ql = nl - pl
    nr = m - nl
    pr = p - pl
    qr = nr - pr
    child = (nl - (pl * pl + ql * ql) / nl) + (nr - (pr * pr + qr * qr) / nr)
    valid = xs[:-1] < xs[1:]
    if not valid.any():
        return None
    child[~valid] = np.inf
    i = int(np.argmin(child))
    thr = (xs[i] + xs[i + 1]) / 2.0
    if thr >= xs[i + 1]:
        thr = xs[i]
    return child[i], thr


def _threshold_child(x: np.ndarray, ys: np.ndarray, thr: float, m: int, p: float) -> float:
    go_left = x <= thr
    nl = float(np.count_nonzero(go_left))
    pl = float(ys[go_left].sum())
    ql = nl - pl
    nr = m - nl
    pr = p - pl
    qr = nr - pr
    return (nl - (pl * pl + ql * ql) / nl) + (nr - (pr * pr + qr * qr) / nr)


def grow_tree(
    X: np.ndarray,
    y: np.ndarray,
    sample_idx: np.ndarray,
    max_features: int,
    max_depth: int,
    extra: bool,
    rng_state: int,
    importances: np.ndarray,
):
    """Grow one binary classification tree on ``X[sample_idx]``.

    Returns ``(feature, threshold, left, right, value)`` arrays; leaves have
    ``left == -1`` and ``value`` is the positive fraction of their samples.
    Gini decreases (in sample units) are added into ``importances``.
    """
    d = X.shape[1]
    rng = SplitMix64(rng_state)
    feats = list(range(d))
    feature: list[int] = [-1]
    threshold: list[float] = [0.0]
    left: list[int] = [-1]
    right: list[int] = [-1]
    value: list[float] = [0.0]
    stack = [(0, np.asarray(sample_idx, dtype=np.intp), 0)]
    while stack:
        nid, idx, depth = stack.pop()
        m = idx.shape[0]
        ys = y[idx]
        p_int = int(ys.sum())
        value[nid] = p_int / m
        if depth >= max_depth or m < 2 or p_int == 0 or p_int == m:
            continue
        p = float(p_int)
        q = m - p
        parent_imp = m - (p * p + q * q) / m
        best_child = np.inf
        best_f = -1
        best_thr = 0.0
        for i in range(max_features):
            j = i + rng.below(d - i)
            feats[i], feats[j] = feats[j], feats[i]
            f = feats[i]
            x = X[idx, f]
            if extra:
                lo = x.min()
                hi = x.max()
                if lo == hi:
                    continue
                thr = lo + rng.uniform() * (hi - lo)
                if thr >= hi:
                    thr = lo
                child = _threshold_child(x, ys, thr, m, p)
            else:
                order = np.argsort(x, kind="stable")
                found = _best_sorted_split(x[order], ys[order], p)
                if found is None:
                    continue
                child, thr = found
            if child < best_child:
                best_child = child
                best_f = f
                best_thr = thr
        if best_f < 0:
            continue
        importances[best_f] += parent_imp - best_child
        go_left = X[idx, best_f] <= best_thr
        lid = len(feature)
        rid = lid + 1
        for _ in range(2):
            feature.append(-1)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
            value.append(0.0)
        feature[nid] = best_f
        threshold[nid] = best_thr
        left[nid] = lid
        right[nid] = rid
        stack.append((rid, idx[~go_left], depth + 1))
        stack.append((lid, idx[go_left], depth + 1))
    return (
        np.asarray(feature, dtype=np.intp),
        np.asarray(threshold, dtype=np.float64),
        np.asarray(left, dtype=np.intp),
        np.asarray(right, dtype=np.intp),
        np.asarray(value, dtype=np.float64),
    )


def apply_tree(X, feature, threshold, left, right, value) -> np.ndarray:
    """Leaf value reached by every row of ``X``."""
    node = np.zeros(X.shape[0], dtype=np.intp)
    rows = np.arange(X.shape[0])
    active = left[node] >= 0
    while active.any():
        r = rows[active]
        nd = node[active]
        go_left = X[r, feature[nd]] <= threshold[nd]
        node[active] = np.where(go_left, left[nd], right[nd])
        active = left[node] >= 0
    return value[node]

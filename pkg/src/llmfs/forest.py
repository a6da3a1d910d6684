"""Random-forest and extra-trees ensembles on top of the tree kernel."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from llmfs import _kernels
from llmfs.seeding import as_seed


def default_max_features(d: int) -> int:
    return max(1, int(math.sqrt(d)))


@dataclass
class Forest:
    """Fitted ensemble. ``trees`` hold the kernel's flat node arrays."""

    trees: list[tuple[np.ndarray, ...]]
    n_features: int
    importances: np.ndarray = field(repr=False)

    def positive_fraction(self, X: np.ndarray) -> np.ndarray:
        """Share of trees whose leaf votes positive (leaf fraction > 0.5)."""
        X = np.ascontiguousarray(X, dtype=np.float64)
        votes = np.zeros(X.shape[0], dtype=np.float64)
        for tree in self.trees:
            votes += _kernels.apply_tree(X, *tree) > 0.5
        return votes / len(self.trees)


def _tree_inputs(n: int, seed: int, tree_index: int, bootstrap: bool):
    rng = np.random.default_rng([as_seed(seed), tree_index])
    rows = rng.integers(0, n, size=n) if bootstrap else np.arange(n)
    state = int(rng.integers(0, 2**63 - 1))
    return rows, state


def fit_forest(
    X: np.ndarray,
    y: np.ndarray,
    *,
    n_trees: int = 100,
    max_depth: int = 12,
    bootstrap: bool = True,
    extra: bool = False,
    seed: int = 0,
    max_features: int | None = None,
    n_jobs: int = 1,
) -> Forest:
    """Grow ``n_trees`` trees; tree ``t`` draws its rows and split randomness from ``(seed, t)``.

    ``bootstrap=True, extra=False`` is a random forest; ``bootstrap=False,
    extra=True`` gives extremely randomized trees. Importances are summed Gini
    decreases per feature, normalized to sum to 1 (uniform when no split
    happened at all).
    """
    if n_trees < 1:
        raise ValueError("n_trees must be >= 1")
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.int8)
    n, d = X.shape
    mf = default_max_features(d) if max_features is None else int(max_features)

    def grow(t: int):
        rows, state = _tree_inputs(n, seed, t, bootstrap)
        imp = np.zeros(d, dtype=np.float64)
        tree = _kernels.grow_tree(X, y, rows, mf, max_depth, extra, state, imp)
        return tree, imp

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            grown = list(pool.map(grow, range(n_trees)))
    else:
        grown = [grow(t) for t in range(n_trees)]
    total = np.zeros(d, dtype=np.float64)
    # summed in tree order so thread count cannot change the result
    for _, imp in grown:
        total += imp
    s = total.sum()
    importances = total / s if s > 0 else np.full(d, 1.0 / d)
    return Forest([t for t, _ in grown], d, importances)

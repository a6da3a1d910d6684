"""Time tree growth with the compiled kernel against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--n 800] [--d 50] [--repeats 5]

Both backends are given identical inputs, and their trees are checked for
equality before any timing is reported.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from llmfs._kernels import _pytree
from llmfs.data import SynthSpec, generate_synthetic
from llmfs.forest import default_max_features

try:
    from llmfs._kernels import _ctree
except ImportError:  # extension not built
    _ctree = None


def grow(mod, X, y, extra, seed):
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, X.shape[0], X.shape[0]).astype(np.intp)
    imp = np.zeros(X.shape[1])
    state = int(rng.integers(0, 2**63))
    tree = mod.grow_tree(X, y, idx, default_max_features(X.shape[1]), 12, extra, state, imp)
    return tree, imp


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=800)
    ap.add_argument("--d", type=int, default=50)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()
    if _ctree is None:
        raise SystemExit("compiled kernel not available; build with `pip install -e .`")

    ds = generate_synthetic(SynthSpec(args.n, args.d, 5, 2.0, 0))
    X = np.ascontiguousarray(ds.features, dtype=np.float64)
    y = np.ascontiguousarray(ds.labels, dtype=np.int8)

    print(f"n={args.n} d={args.d} max_depth=12, best of {args.repeats}")
    print(f"{'splitter':<14}{'cython ms':>12}{'python ms':>12}{'speedup':>10}")
    for extra, label in ((False, "best-split"), (True, "random-split")):
        c_tree, c_imp = grow(_ctree, X, y, extra, 1)
        p_tree, p_imp = grow(_pytree, X, y, extra, 1)
        assert all(np.array_equal(a, b) for a, b in zip(c_tree, p_tree)), "backends disagree"
        assert np.array_equal(c_imp, p_imp)
        tc = best_of(lambda: grow(_ctree, X, y, extra, 1), args.repeats)
        tp = best_of(lambda: grow(_pytree, X, y, extra, 1), max(1, args.repeats // 2))
        print(f"{label:<14}{tc * 1e3:>12.2f}{tp * 1e3:>12.2f}{tp / tc:>9.1f}x")


if __name__ == "__main__":
    main()

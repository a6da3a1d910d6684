"""Classical feature scorers.

Each scorer maps a training Dataset to a :class:`ScoreVector` over all d
features so a single top-k step serves every method. The sequential
wrapper is the exception: it returns its greedy selection directly.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from llmfs.data import Dataset, split
from llmfs.errors import KTooLarge, SingleClassDataset, TooFewSamples
from llmfs.forest import fit_forest
from llmfs.seeding import as_seed, derive_seed
from llmfs.selection import ScoreVector, SelectionResult

log = logging.getLogger(__name__)

_FMAX = np.finfo(np.float64).max

CLASSIC_METHODS = (
    "variance",
    "chi2",
    "anova",
    "mi",
    "correlation",
    "tree",
    "extratrees",
    "sequential",
    "random",
)


def _require_both_classes(train: Dataset) -> None:
    if not train.has_both_classes():
        raise SingleClassDataset("scorer needs both classes in the training split")


def variance_scores(train: Dataset) -> ScoreVector:
    return ScoreVector(train.features.var(axis=0), "variance")


def chi2_scores(train: Dataset) -> ScoreVector:
    """Chi-squared statistic of summed feature mass per class against class priors.

    Columns holding negative values are first shifted by their own minimum;
    the shifted column indices are listed in ``info["chi2_shifted"]``.
    """
    X = np.array(train.features, dtype=np.float64)
    mins = X.min(axis=0)
    shifted = np.flatnonzero(mins < 0)
    if shifted.size:
        X[:, shifted] -= mins[shifted]
        log.info("chi2: shifted %d column(s) with negative values", shifted.size)
    y = train.labels
    n = y.shape[0]
    total = X.sum(axis=0)
    stat = np.zeros(X.shape[1])
    for cls in (0, 1):
        prior = np.count_nonzero(y == cls) / n
        observed = X[y == cls].sum(axis=0)
        expected = prior * total
        ok = expected > 0
        stat[ok] += (observed[ok] - expected[ok]) ** 2 / expected[ok]
    return ScoreVector(stat, "chi2", info={"chi2_shifted": shifted.tolist()})


def anova_f_scores(train: Dataset) -> ScoreVector:
    """Two-group one-way ANOVA F (df_between = 1, df_within = n - 2)."""
    n = train.n_samples
    if n < 3:
        raise TooFewSamples(f"ANOVA F needs n >= 3, got {n}")
    X = train.features
    y = train.labels
    grand = X.mean(axis=0)
    ssb = np.zeros(X.shape[1])
    ssw = np.zeros(X.shape[1])
    for cls in (0, 1):
        Xc = X[y == cls]
        if Xc.shape[0] == 0:
            continue
        mc = Xc.mean(axis=0)
        ssb += Xc.shape[0] * (mc - grand) ** 2
        ssw += ((Xc - mc) ** 2).sum(axis=0)
    f = np.zeros(X.shape[1])
    pos = ssb > 0
    finite = pos & (ssw > 0)
    f[finite] = ssb[finite] / (ssw[finite] / (n - 2))
    f[pos & (ssw == 0)] = _FMAX
    return ScoreVector(f, "anova")


def equal_width_bins(x: np.ndarray, n_bins: int) -> np.ndarray:
    lo = x.min()
    hi = x.max()
    if hi == lo:
        return np.zeros(x.shape[0], dtype=np.intp)
    b = np.floor((x - lo) / (hi - lo) * n_bins).astype(np.intp)
    return np.clip(b, 0, n_bins - 1)


def mutual_info_scores(train: Dataset, n_bins: int = 10) -> ScoreVector:
    """Plug-in mutual information (nats) between equal-width-binned features and the label."""
    if train.n_samples < 2:
        raise TooFewSamples("mutual information needs n >= 2")
    y = train.labels.astype(np.intp)
    n = y.shape[0]
    n_c = np.bincount(y, minlength=2).astype(np.float64)
    scores = np.empty(train.n_features)
    for j in range(train.n_features):
        b = equal_width_bins(train.features[:, j], n_bins)
        joint = np.bincount(b * 2 + y, minlength=2 * n_bins).reshape(n_bins, 2).astype(np.float64)
        n_b = joint.sum(axis=1)
        nz = joint > 0
        expected = np.outer(n_b, n_c)[nz]
        scores[j] = max(0.0, float(np.sum(joint[nz] / n * np.log(joint[nz] * n / expected))))
    return ScoreVector(scores, "mi")


def _standardize(X: np.ndarray) -> np.ndarray:
    mu = X.mean(axis=0)
    sd = X.std(axis=0)
    Z = np.zeros_like(X, dtype=np.float64)
    live = sd > 0
    Z[:, live] = (X[:, live] - mu[live]) / sd[live]
    return Z


def label_correlations(train: Dataset) -> np.ndarray:
    """Point-biserial (Pearson with the 0/1 label) per feature; 0 for constant columns."""
    Z = _standardize(train.features)
    y = train.labels.astype(np.float64)
    sy = y.std()
    if sy == 0:
        return np.zeros(train.n_features)
    zy = (y - y.mean()) / sy
    return np.clip(Z.T @ zy / train.n_samples, -1.0, 1.0)


def correlation_filter_scores(train: Dataset, redundancy_threshold: float = 0.95) -> ScoreVector:
    """Redundancy filter expressed as a full ranking.

    Features are scanned by descending |label correlation|. A feature is kept
    unless its |Pearson r| with an already-kept feature exceeds the
    threshold. Kept features score ``2 - rank/d`` and dropped ones ``-rank/d``,
    so top-k returns kept features in scan order before any dropped one.
    """
    if train.n_samples < 2:
        raise TooFewSamples("correlation needs n >= 2")
    d = train.n_features
    r_label = label_correlations(train)
    order = np.lexsort((np.arange(d), -np.abs(r_label)))
    Z = _standardize(train.features)
    n = train.n_samples
    kept: list[int] = []
    scores = np.empty(d)
    eps = 1.0 / d
    for rank, j in enumerate(order):
        redundant = False
        if kept:
            r = Z[:, kept].T @ Z[:, j] / n
            redundant = bool(np.any(np.abs(r) > redundancy_threshold))
        if redundant:
            scores[j] = -rank * eps
        else:
            kept.append(int(j))
            scores[j] = 2.0 - rank * eps
    return ScoreVector(scores, "correlation", info={"n_kept": len(kept)})


def tree_importance_scores(
    train: Dataset, n_trees: int = 100, max_depth: int = 12, seed: int = 0, n_jobs: int = 1
) -> ScoreVector:
    _require_both_classes(train)
    forest = fit_forest(
        train.features, train.labels, n_trees=n_trees, max_depth=max_depth,
        bootstrap=True, extra=False, seed=seed, n_jobs=n_jobs,
    )
    return ScoreVector(forest.importances, "tree")


def extratrees_importance_scores(
    train: Dataset, n_trees: int = 100, max_depth: int = 12, seed: int = 0, n_jobs: int = 1
) -> ScoreVector:
    _require_both_classes(train)
    forest = fit_forest(
        train.features, train.labels, n_trees=n_trees, max_depth=max_depth,
        bootstrap=False, extra=True, seed=seed, n_jobs=n_jobs,
    )
    return ScoreVector(forest.importances, "extratrees")


PROXY_TREES = 25
PROXY_DEPTH = 8


def _proxy_accuracy(fit_part: Dataset, val_part: Dataset, cols: list[int], seed: int) -> float:
    forest = fit_forest(
        fit_part.features[:, cols], fit_part.labels, n_trees=PROXY_TREES,
        max_depth=PROXY_DEPTH, bootstrap=False, extra=True, seed=seed,
    )
    pred = forest.positive_fraction(val_part.features[:, cols]) > 0.5
    return float(np.mean(pred == val_part.labels))


def sequential_forward_select(
    train: Dataset, k: int, candidates_per_round: int = 32, seed: int = 0, n_jobs: int = 1
) -> SelectionResult:
    """Greedy forward selection scored by a small extra-trees proxy.

    Each round samples up to ``candidates_per_round`` unselected features and
    adds the one whose proxy validation accuracy is highest (lower index on
    ties). The proxy trains on 80% of ``train`` and scores on the other 20%.
    """
    _require_both_classes(train)
    d = train.n_features
    if k > d:
        raise KTooLarge(f"k={k} exceeds {d} features")
    if k < 1:
        raise ValueError("k must be >= 1")
    fit_part, val_part = split(train, 0.8, derive_seed(seed, "sequential-validation"))
    rng = np.random.default_rng(as_seed(seed))
    selected: list[int] = []
    accuracies: list[float] = []
    remaining = np.arange(d)
    for round_no in range(k):
        m = min(candidates_per_round, remaining.size)
        cands = np.sort(rng.choice(remaining, size=m, replace=False))
        proxy_seed = derive_seed(seed, "sequential-proxy", round_no)

        def score(c: int) -> float:
            return _proxy_accuracy(fit_part, val_part, selected + [int(c)], proxy_seed)

        if n_jobs > 1:
            with ThreadPoolExecutor(max_workers=n_jobs) as pool:
                accs = list(pool.map(score, cands))
        else:
            accs = [score(c) for c in cands]
        best = int(np.argmax(accs))  # first maximum = lowest index among ties
        selected.append(int(cands[best]))
        accuracies.append(accs[best])
        remaining = remaining[remaining != cands[best]]
    return SelectionResult(tuple(selected), "sequential", k, tuple(accuracies))


def random_scores(train: Dataset, seed: int = 0) -> ScoreVector:
    d = train.n_features
    perm = np.random.default_rng(as_seed(seed)).permutation(d) + 1
    return ScoreVector(perm / d, "random")
